use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::{Isometry3, Point3};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use pole_assist::geometry::{
    coverage_sweep, coverage_sweep_envelope, recommend_zone, Attitude, CoverageGrid, Interval,
    PlatformPose,
};
use pole_assist::perception::{
    camera_extrinsic, read_xyz, run_pipeline, synth_cloud, write_xyz, Frame,
};
use pole_assist::scenario::{SceneConfig, TraceFile};
use pole_assist::simulator::{run_episode, FlightLog};
use pole_assist_service::{start, LiveSession, ServeOptions, DEFAULT_GRACE_PERIOD};

#[derive(Parser)]
#[command(name = "pole-assist", version, about = "Coverage, detection and assisted-control simulation for pole inspection")]
struct Cli {
    /// Scene configuration (JSON).
    #[arg(long, global = true, default_value = "scenes/reference.json")]
    scene: PathBuf,
    /// Overrides the scene's random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep coverage metrics over a (range, height) grid and recommend a zone.
    Coverage(CoverageArgs),
    /// Run a closed-loop episode from an operator trace.
    Simulate(SimulateArgs),
    /// Detect the pole in XYZ point-cloud files.
    Detect(DetectArgs),
    /// Write synthetic camera clouds for a platform pose.
    Synth(SynthArgs),
    /// Serve a live episode over a WebSocket.
    Serve(ServeArgs),
}

#[derive(Args)]
struct CoverageArgs {
    /// Range interval as min,max in metres.
    #[arg(long, value_parser = parse_interval)]
    r_range: Option<Interval>,
    /// Height interval as min,max in metres relative to the crossarm.
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    dh_range: Option<Interval>,
    #[arg(long)]
    step: Option<f64>,
    /// Fixed pitch in degrees; sweeps the attitude envelope when neither
    /// pitch nor roll is given.
    #[arg(long, allow_hyphen_values = true)]
    pitch: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    roll: Option<f64>,
    #[arg(long)]
    floor: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Operator trace (JSON).
    #[arg(long)]
    trace: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    /// One XYZ file per camera, or a single platform-frame file with --platform-frame.
    #[arg(required = true)]
    clouds: Vec<PathBuf>,
    /// Treat the single input as already merged into the platform frame.
    #[arg(long)]
    platform_frame: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Platform position x,y,z in metres.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    position: Point3<f64>,
    /// Heading in degrees; faces the pole when omitted.
    #[arg(long, allow_hyphen_values = true)]
    yaw: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8765")]
    bind: String,
    /// Simulated seconds per wall-clock second.
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    /// Seconds a command is held after the last client message.
    #[arg(long, default_value_t = DEFAULT_GRACE_PERIOD)]
    grace: f64,
    /// Stop after this many ticks.
    #[arg(long)]
    ticks: Option<u64>,
}

fn parse_interval(s: &str) -> Result<Interval, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b] if a.is_finite() && b.is_finite() && a <= b => Ok(Interval::new(*a, *b)),
        [_, _] => Err(format!("empty interval {s}")),
        _ => Err("expected min,max".into()),
    }
}

fn parse_vec3(s: &str) -> Result<Point3<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] => Ok(Point3::new(*x, *y, *z)),
        _ => Err("expected x,y,z".into()),
    }
}

fn main() -> std::process::ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let scene = SceneConfig::load(&cli.scene)
        .with_context(|| format!("loading scene {}", cli.scene.display()))?;
    match cli.command {
        Command::Coverage(a) => coverage(&scene, a, cli.out.as_deref()),
        Command::Simulate(a) => simulate(&scene, a, cli.seed, cli.out.as_deref()),
        Command::Detect(a) => detect(&scene, a),
        Command::Synth(a) => synth(&scene, a, cli.seed, cli.out.as_deref()),
        Command::Serve(a) => serve(&scene, a, cli.seed, cli.out.as_deref()),
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn coverage(scene: &SceneConfig, a: CoverageArgs, out: Option<&Path>) -> Result<()> {
    let infra = scene.infrastructure();
    let sensor = scene.sensor();
    let r_range = a.r_range.unwrap_or_else(|| scene.r_range());
    let dh_range = a.dh_range.unwrap_or_else(|| scene.dh_range());
    let step = a.step.unwrap_or(scene.coverage.grid_step_m);
    let floor = a.floor.unwrap_or(scene.coverage.metric_floor);
    let started = Instant::now();
    let grid = if a.pitch.is_none() && a.roll.is_none() {
        coverage_sweep_envelope(&infra, &sensor, r_range, dh_range, step, scene.envelope())?
    } else {
        let attitude = Attitude {
            roll: a.roll.unwrap_or(0.0).to_radians(),
            pitch: a.pitch.unwrap_or(0.0).to_radians(),
        };
        coverage_sweep(&infra, &sensor, r_range, dh_range, step, attitude)?
    };
    let elapsed = started.elapsed().as_secs_f64();

    // without --out the CSV owns stdout and the summary moves to stderr
    let mut summary: Box<dyn Write> = match out {
        Some(path) => {
            grid.write_csv(create(path)?)?;
            Box::new(std::io::stdout())
        }
        None => {
            grid.write_csv(std::io::stdout().lock())?;
            Box::new(std::io::stderr())
        }
    };
    write_coverage_summary(&mut summary, &grid, floor, elapsed)?;
    match recommend_zone(&grid, &infra, floor) {
        Ok(z) => writeln!(
            summary,
            "recommended zone: r_z = {:.2} m, h_z = {:.2} m, d_z = {:.2} m",
            z.cylinder_radius, z.slab_height, z.slab_width
        )?,
        Err(e) => writeln!(summary, "recommended zone: none ({e})")?,
    }
    Ok(())
}

fn write_coverage_summary(
    w: &mut dyn Write,
    grid: &CoverageGrid,
    floor: f64,
    elapsed: f64,
) -> Result<()> {
    let above: Vec<_> = grid.cells.iter().filter(|c| c.pole_metric >= floor).collect();
    writeln!(w, "cells: {} ({:.1} s)", grid.cells.len(), elapsed)?;
    writeln!(w, "cells with pole metric >= {floor}: {}", above.len())?;
    if !above.is_empty() {
        let (mut r0, mut r1, mut h0, mut h1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for c in &above {
            r0 = r0.min(c.r);
            r1 = r1.max(c.r);
            h0 = h0.min(c.dh);
            h1 = h1.max(c.dh);
        }
        writeln!(w, "detectable region: {r0} <= r_q <= {r1}, {h0} <= dh <= {h1}")?;
    }
    Ok(())
}

fn simulate(scene: &SceneConfig, a: SimulateArgs, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let trace = TraceFile::load(&a.trace)
        .with_context(|| format!("loading trace {}", a.trace.display()))?;
    let mut cfg = scene.sim();
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let log = run_episode(
        &scene.infrastructure(),
        &scene.sensor(),
        &trace.trace(),
        &cfg,
        &scene.control(),
        &scene.filter(),
    )?;
    if let Some(path) = out {
        write_log(&log, path)?;
    }
    print_log_summary(&log);
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

fn write_log(log: &FlightLog, path: &Path) -> Result<()> {
    log.write_csv(create(path)?)?;
    let mut meta = create(&sidecar(path))?;
    log.write_metadata(&mut meta)?;
    writeln!(meta)?;
    Ok(())
}

fn print_log_summary(log: &FlightLog) {
    let s = log.summary();
    println!("ticks: {}", s.ticks);
    println!("min range: {:.3} m", s.min_range);
    println!("allowance floor: {:.3} m", s.allowance_floor);
    println!("breaches: {}", s.breaches);
    let hist: Vec<String> = s
        .state_histogram
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    println!("states: {}", hist.join(" "));
    println!("state 4 dwell: {:.1} s", s.state4_dwell);
}

fn detect(scene: &SceneConfig, a: DetectArgs) -> Result<()> {
    let filter = scene.filter();
    let sensor = scene.sensor();
    let (frames, extrinsics): (Vec<Frame>, Vec<Isometry3<f64>>) = if a.platform_frame {
        if a.clouds.len() != 1 {
            bail!("--platform-frame takes exactly one cloud file");
        }
        (vec![Frame::Camera(0)], vec![Isometry3::identity()])
    } else {
        if a.clouds.len() != sensor.cameras.len() {
            bail!(
                "scene has {} camera(s) but {} cloud file(s) were given",
                sensor.cameras.len(),
                a.clouds.len()
            );
        }
        (
            (0..a.clouds.len()).map(Frame::Camera).collect(),
            sensor.cameras.iter().map(camera_extrinsic).collect(),
        )
    };
    let clouds = a
        .clouds
        .iter()
        .zip(frames)
        .map(|(path, frame)| {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            read_xyz(BufReader::new(f), frame).with_context(|| format!("reading {}", path.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let detection = run_pipeline(&clouds, &extrinsics, &filter, 0.0)?;
    println!("{}", serde_json::to_string(&detection)?);
    Ok(())
}

fn synth(scene: &SceneConfig, a: SynthArgs, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let infra = scene.infrastructure();
    let mut pose = PlatformPose::facing_pole(a.position, &infra);
    if let Some(yaw) = a.yaw {
        pose.yaw = yaw.to_radians();
    }
    if !(a.noise >= 0.0) || !(0.0..1.0).contains(&a.dropout) {
        bail!("noise must be >= 0 and dropout in [0, 1)");
    }
    let clouds = synth_cloud(&infra, &scene.sensor(), &pose, a.noise, a.dropout, seed.unwrap_or(scene.sim.seed));
    let stem = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("cloud"));
    for (i, cloud) in clouds.iter().enumerate() {
        let path = PathBuf::from(format!("{}_{i}.xyz", stem.display()));
        write_xyz(cloud, create(&path)?)?;
        println!("{} ({} points)", path.display(), cloud.len());
    }
    Ok(())
}

fn serve(scene: &SceneConfig, a: ServeArgs, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    let log = rt.block_on(async {
        let session = LiveSession::new(scene, seed, a.grace)?;
        let opts = ServeOptions {
            speed: a.speed,
            max_ticks: a.ticks,
        };
        let handle = start(session, &a.bind, opts).await?;
        eprintln!("serving on ws://{}", handle.addr);
        if a.ticks.is_some() {
            Ok::<_, anyhow::Error>(handle.finish().await?)
        } else {
            tokio::signal::ctrl_c().await?;
            Ok(handle.shutdown().await?)
        }
    })?;
    if let Some(path) = out {
        write_log(&log, path)?;
    }
    print_log_summary(&log);
    Ok(())
}
