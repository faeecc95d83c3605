use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::{UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::archive::ModelArchive;
use super::config::RunConfig;
use super::infer::{grasp_list_json, infer_cloud};
use super::synth::{parse_list, scan, ScanParams, Shape};
use super::train::{train, Example};
use crate::error::Error;
use crate::geom::Pose;
use crate::hand::{approach_and_close, close_against_cloud, CloudCollider, HandDescription, Trajectory};
use crate::surface::PointCloud;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ugrasp", version, about = "Learn grasps for underactuated hands from examples and transfer them to new objects")]
struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn contact, configuration and reach models from example grasps.
    Train {
        /// Hand description JSON; the built-in two-finger hand if omitted.
        #[arg(long)]
        hand: Option<PathBuf>,
        /// Example point cloud (PLY), one per example.
        #[arg(long = "cloud", required = true)]
        clouds: Vec<PathBuf>,
        /// Example trajectory JSON, one per example.
        #[arg(long = "traj", required = true)]
        trajs: Vec<PathBuf>,
        /// Grasp type label, one per example.
        #[arg(long = "type", required = true)]
        types: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Find grasps on a new object.
    Infer {
        /// Model archive written by `train`.
        #[arg(long, alias = "model")]
        archive: PathBuf,
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Number of grasps to write.
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a synthetic single-view point cloud of a simple shape.
    Gen {
        /// sphere, cylinder, box or ellipsoid.
        #[arg(long)]
        shape: String,
        /// Comma-separated dimensions: sphere r; cylinder r,h; box x,y,z; ellipsoid a,b,c.
        #[arg(long, allow_hyphen_values = true)]
        dims: String,
        /// Points per square meter of surface.
        #[arg(long, default_value_t = 1e5)]
        density: f64,
        #[arg(long, default_value = "0,0,1", allow_hyphen_values = true)]
        viewpoint: String,
        /// Translation of the shape centre.
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        offset: String,
        /// Rotation of the shape as a rotation vector (radians).
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        rotate: String,
        /// Standard deviation of coordinate noise (m).
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Keep points facing away from the viewpoint.
        #[arg(long)]
        full_view: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate an example trajectory by closing the hand against a cloud.
    Close {
        #[arg(long)]
        hand: Option<PathBuf>,
        #[arg(long)]
        cloud: PathBuf,
        /// Final wrist pose: px,py,pz,qw,qx,qy,qz.
        #[arg(long, allow_hyphen_values = true)]
        grasp: String,
        /// Approach distance along the palm normal (m).
        #[arg(long, default_value_t = 0.1)]
        approach: f64,
        #[arg(long, default_value_t = 20)]
        approach_steps: usize,
        #[arg(long, default_value_t = 60)]
        close_steps: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the built-in two-finger hand description.
    Hand {
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure of a CLI invocation, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Run(e) if e.is_degenerate() => EXIT_DEGENERATE,
            CliError::Run(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn load_hand(path: Option<&Path>) -> Result<HandDescription, CliError> {
    Ok(match path {
        Some(p) => HandDescription::load(p)?,
        None => HandDescription::default_two_finger(),
    })
}

fn vector3(s: &str, what: &str) -> Result<Vector3<f64>, CliError> {
    match parse_list(s).map_err(|e| CliError::Usage(e.to_string()))?.as_slice() {
        [x, y, z] => Ok(Vector3::new(*x, *y, *z)),
        v => Err(CliError::Usage(format!("{what} needs 3 numbers, got {}", v.len()))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Run(Error::io(path, e)))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Train {
            hand,
            clouds,
            trajs,
            types,
            config,
            out,
        } => {
            if clouds.len() != trajs.len() || clouds.len() != types.len() {
                return Err(CliError::Usage(format!(
                    "--cloud, --traj and --type must be repeated equally often (got {}, {}, {})",
                    clouds.len(),
                    trajs.len(),
                    types.len()
                )));
            }
            let config = load_config(config.as_deref())?;
            let hand = load_hand(hand.as_deref())?;
            let examples = clouds
                .iter()
                .zip(&trajs)
                .zip(&types)
                .map(|((c, t), g)| {
                    Ok(Example {
                        source: c.display().to_string(),
                        cloud: PointCloud::load(c)?,
                        trajectory: Trajectory::load(t)?,
                        grasp_type: g.clone(),
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let archive = train(&hand, &examples, &config.learning)?;
            for g in &archive.grasp_types {
                println!("grasp type {} ({} examples)", g.name, g.num_examples());
                for (i, link) in archive.hand.links().iter().enumerate() {
                    let norms: Vec<String> = g.norms[i].iter().map(|v| format!("{v:.4}")).collect();
                    let flags: String = g.contacts.selection.per_example[i]
                        .iter()
                        .map(|b| if *b { '1' } else { '0' })
                        .collect();
                    println!(
                        "  {:<20} norms [{}] b={} c={}",
                        link.name,
                        norms.join(", "),
                        flags,
                        u8::from(g.contacts.selection.per_link[i])
                    );
                }
            }
            archive.save(&out)?;
        }
        Command::Infer {
            archive,
            cloud,
            config,
            out,
            top,
            seed,
        } => {
            let config = load_config(config.as_deref())?;
            let archive = ModelArchive::load(&archive)?;
            let cloud = PointCloud::load(&cloud)?;
            let seed = seed.unwrap_or(config.seed);
            let result = infer_cloud(&archive, &cloud, &config, seed)?;
            if result.candidates.is_empty() {
                log::warn!("no grasp survived pruning");
            }
            if let Some(best) = result.candidates.first() {
                println!(
                    "best grasp: type {} log normalized likelihood {:.3}",
                    archive.grasp_types[best.grasp_type].name, best.log_normalized
                );
            }
            write_file(&out, &grasp_list_json(&archive, &result, top))?;
        }
        Command::Gen {
            shape,
            dims,
            density,
            viewpoint,
            offset,
            rotate,
            noise,
            full_view,
            seed,
            out,
        } => {
            let dims = parse_list(&dims).map_err(|e| CliError::Usage(e.to_string()))?;
            let shape = Shape::from_kind(&shape, &dims)?;
            let params = ScanParams {
                density,
                viewpoint: vector3(&viewpoint, "--viewpoint")?,
                noise,
                full_view,
            };
            let placement = Pose::new(
                vector3(&offset, "--offset")?,
                UnitQuaternion::from_scaled_axis(vector3(&rotate, "--rotate")?),
            );
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cloud = scan(&shape, &placement, &params, &mut rng)?;
            println!("{} points", cloud.len());
            cloud.save(&out)?;
        }
        Command::Close {
            hand,
            cloud,
            grasp,
            approach,
            approach_steps,
            close_steps,
            config,
            out,
        } => {
            let config = load_config(config.as_deref())?;
            let hand = load_hand(hand.as_deref())?;
            let values = parse_list(&grasp).map_err(|e| CliError::Usage(e.to_string()))?;
            let array: [f64; 7] = values
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Usage(format!("--grasp needs 7 numbers, got {}", values.len())))?;
            let grasp = Pose::from_array(array)?;
            if close_steps == 0 {
                return Err(CliError::Usage("--close-steps must be positive".into()));
            }
            let cloud = PointCloud::load(&cloud)?;
            let (wrist, motor) = approach_and_close(&grasp, approach, approach_steps, close_steps);
            let closing = close_against_cloud(&hand, &wrist, &motor, &CloudCollider::new(&cloud.points), &config.closing)?;
            let frozen: String = closing.frozen.iter().map(|f| if *f { '1' } else { '0' }).collect();
            println!("{} states, frozen joints {frozen}", closing.trajectory.len());
            closing.trajectory.save(&out)?;
        }
        Command::Hand { out } => {
            HandDescription::default_two_finger().save(&out)?;
        }
    }
    Ok(())
}

/// Parses arguments and runs one command. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
