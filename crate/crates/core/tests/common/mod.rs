//! Synthetic demonstration set shared by the end-to-end tests.
//!
//! Three objects sit at the origin and are grasped from above with the palm
//! facing down and the fingers closing along world y. Training clouds are
//! single views from an oblique camera on the −y side, so finger 1 (on −y)
//! is seen and finger 2 is hidden. Reach trajectories come from closing the
//! hand against full-view clouds.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use nalgebra::{UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ugrasp::app::{scan, train, Example, ModelArchive, RunConfig, ScanParams, Shape};
use ugrasp::geom::Pose;
use ugrasp::hand::{approach_and_close, close_against_cloud, ClosingParams, CloudCollider, HandDescription, Trajectory};
use ugrasp::surface::PointCloud;

pub const VIEWPOINT: [f64; 3] = [0.0, -0.3, 0.5];
pub const GRASP_TYPE: &str = "pinch";

pub struct Object {
    pub name: &'static str,
    pub shape: Shape,
    pub placement: Pose,
    /// Height of the wrist at the demonstrated grasp.
    pub wrist_height: f64,
    pub seed: u64,
}

pub fn training_objects() -> Vec<Object> {
    vec![
        Object {
            name: "sphere",
            shape: Shape::Sphere { radius: 0.035 },
            placement: Pose::identity(),
            wrist_height: 0.05,
            seed: 1,
        },
        Object {
            name: "cylinder",
            shape: Shape::Cylinder {
                radius: 0.03,
                height: 0.12,
            },
            placement: Pose::from_rotation(UnitQuaternion::from_scaled_axis(Vector3::new(0.0, FRAC_PI_2, 0.0))),
            wrist_height: 0.045,
            seed: 2,
        },
        Object {
            name: "box",
            shape: Shape::Box { size: [0.03, 0.05, 0.05] },
            placement: Pose::identity(),
            wrist_height: 0.04,
            seed: 3,
        },
    ]
}

pub fn novel_object() -> Object {
    Object {
        name: "ellipsoid",
        shape: Shape::Ellipsoid {
            axes: [0.04, 0.03, 0.035],
        },
        placement: Pose::identity(),
        wrist_height: 0.05,
        seed: 4,
    }
}

/// Palm facing down, wrist above the origin.
pub fn top_grasp(height: f64) -> Pose {
    Pose::new(
        Vector3::new(0.0, 0.0, height),
        UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI),
    )
}

pub fn scan_object(object: &Object, full_view: bool) -> PointCloud {
    let params = ScanParams {
        viewpoint: Vector3::from(VIEWPOINT),
        full_view,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(object.seed);
    scan(&object.shape, &object.placement, &params, &mut rng).expect("scan")
}

pub fn demonstrate(hand: &HandDescription, object: &Object) -> Trajectory {
    let full = scan_object(object, true);
    let (wrist, motor) = approach_and_close(&top_grasp(object.wrist_height), 0.1, 20, 60);
    close_against_cloud(hand, &wrist, &motor, &CloudCollider::new(&full.points), &ClosingParams::default())
        .expect("closing")
        .trajectory
}

pub struct Scenario {
    pub hand: HandDescription,
    pub objects: Vec<Object>,
    pub clouds: Vec<PointCloud>,
    pub trajectories: Vec<Trajectory>,
    pub archive: ModelArchive,
}

pub fn scenario() -> Scenario {
    let hand = HandDescription::default_two_finger();
    let objects = training_objects();
    let clouds: Vec<PointCloud> = objects.iter().map(|o| scan_object(o, false)).collect();
    let trajectories: Vec<Trajectory> = objects.iter().map(|o| demonstrate(&hand, o)).collect();
    let examples: Vec<Example> = objects
        .iter()
        .zip(&clouds)
        .zip(&trajectories)
        .map(|((o, c), t)| Example {
            source: o.name.to_string(),
            cloud: c.clone(),
            trajectory: t.clone(),
            grasp_type: GRASP_TYPE.to_string(),
        })
        .collect();
    let archive = train(&hand, &examples, &end_to_end_config().learning).expect("training");
    Scenario {
        hand,
        objects,
        clouds,
        trajectories,
        archive,
    }
}

/// Settings of the end-to-end runs: defaults with denser query densities.
pub fn end_to_end_config() -> RunConfig {
    let mut config = RunConfig::default();
    config.inference.query_kernels = 2000;
    config
}

/// Rotation angle between two orientations, treating q and −q as equal.
pub fn wrist_angle(a: &Pose, b: &Pose) -> f64 {
    ugrasp::geom::rotation_angle(&a.orientation, &b.orientation)
}
