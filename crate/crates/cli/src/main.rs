use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mvquad::textfmt::{parse_field, parse_modes, sniff, write_field, write_modes};
use mvquad::{
    build_3d, build_bottom_up, cost_report, cost_report_3d, decide_field, decode_3d, decode_interframe, decode_mixed,
    encode_3d, encode_interframe, encode_mixed, encode_mixed_auto, estimate_field, fill_holes, flatten, flatten_3d,
    frame_mad, load_pgm, load_raw_y8, mixed_bounds, mixed_cost_report, store_pgm, synthetic, theoretical_bounds,
    validate_geometry, write_prediction, Container, ContainerMode, CostReport, FieldPair, Frame, GridGeometry,
    MergePolicy, MixedForest, Mode, MotionField, PenaltyPolicy, SearchMode, SearchParams,
};

#[derive(Parser)]
#[command(name = "mvquad", version, about = "Quadtree coding of block motion fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a motion field between two frames.
    Estimate(EstimateArgs),
    /// Code a field file into an MVQ1 container and print its cost table.
    Encode(EncodeArgs),
    /// Turn a container back into field files.
    Decode(DecodeArgs),
    /// Predict a frame from a reference and a field with the writing method.
    Reconstruct(ReconstructArgs),
    /// Print best and worst case coding cost for a grid.
    Bounds(BoundsArgs),
    /// Print the cost table of a container or of a built-in synthetic field.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodingMode {
    Inter,
    Mixed,
    #[value(name = "3d")]
    Temporal3d,
}

#[derive(Clone, Copy, ValueEnum)]
enum Search {
    Cds,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Synthetic {
    Coarse,
    Fine,
}

#[derive(Args)]
struct GridArgs {
    /// Frame width; required for raw input, otherwise checked against the data.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = 16)]
    min_block: usize,
    #[arg(long, default_value_t = 64)]
    max_block: usize,
    #[arg(long, default_value_t = 7)]
    dmax: u32,
}

impl GridArgs {
    fn geometry(&self, width: usize, height: usize) -> Result<GridGeometry> {
        for (name, given, actual) in [("width", self.width, width), ("height", self.height, height)] {
            if let Some(g) = given {
                ensure!(g == actual, "--{name} {g} does not match the data ({actual})");
            }
        }
        Ok(GridGeometry::new(width, height, self.min_block, self.max_block)?)
    }

    fn check(&self, geom: &GridGeometry, d_max: u32) -> Result<()> {
        self.geometry(geom.width(), geom.height())?;
        ensure!(
            geom.min_block() == self.min_block,
            "--min-block {} does not match the data ({})",
            self.min_block,
            geom.min_block()
        );
        ensure!(d_max == self.dmax, "--dmax {} does not match the data ({d_max})", self.dmax);
        Ok(())
    }
}

#[derive(Args)]
struct PenaltyArgs {
    /// Intra penalty P; inter is chosen when inter error < P x intra error.
    #[arg(long, default_value_t = 1.2)]
    penalty: f64,
    /// Scale P by the decisions of already decided siblings.
    #[arg(long)]
    adaptive: bool,
    #[arg(long, default_value_t = 1.25)]
    bias: f64,
}

impl PenaltyArgs {
    fn policy(&self) -> Result<PenaltyPolicy> {
        Ok(PenaltyPolicy::new(self.penalty, self.adaptive, self.bias)?)
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Reference frame (PGM, or raw 8-bit luma with --width/--height).
    reference: PathBuf,
    /// Frame to predict.
    target: PathBuf,
    /// Third frame for 3d mode; the later field maps target onto it.
    next: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Search::Cds)]
    search: Search,
    #[arg(long, value_enum, default_value_t = CodingMode::Inter)]
    mode: CodingMode,
    #[command(flatten)]
    penalty: PenaltyArgs,
    /// Frame index inside raw sequence files, one per input in order.
    #[arg(long, value_delimiter = ',')]
    index: Vec<usize>,
    #[arg(short, long)]
    output: PathBuf,
    /// Second field file in 3d mode.
    #[arg(long)]
    later_output: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    /// `mvfield` or `mixfield` text file.
    field: PathBuf,
    /// Field of the following frame, for 3d mode.
    later: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    /// Defaults to inter for mvfield input (3d when two fields are given) and mixed for mixfield.
    #[arg(long, value_enum)]
    mode: Option<CodingMode>,
    /// Lead the stream with a flag bit; in mixed mode the shorter of the tree and the flat form is kept.
    #[arg(long)]
    flag: bool,
    /// Merge threshold T (Chebyshev); 0 merges only equal vectors.
    #[arg(long, default_value_t = 0)]
    merge_t: u32,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    container: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Second field file for 3d containers.
    #[arg(long)]
    later_output: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    reference: PathBuf,
    /// `mvfield` text file.
    field: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Frame index of the reference inside a raw sequence file.
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Leave holes black instead of filling them from the reference.
    #[arg(long)]
    no_fill: bool,
    /// Frame to measure the prediction against.
    #[arg(long)]
    compare: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = CodingMode::Inter)]
    mode: CodingMode,
    #[arg(long)]
    flag: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Container to report on.
    #[arg(required_unless_present = "synthetic", conflicts_with = "synthetic")]
    container: Option<PathBuf>,
    /// Build a seeded field with a fixed block composition instead.
    #[arg(long, value_enum)]
    synthetic: Option<Synthetic>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the synthetic field as an mvfield file.
    #[arg(long)]
    field_output: Option<PathBuf>,
}

fn load_frame(path: &Path, grid: &GridArgs, index: usize) -> Result<Frame> {
    let mut magic = [0u8; 2];
    let is_pgm = fs::File::open(path)
        .and_then(|mut f| f.read(&mut magic))
        .with_context(|| format!("reading {}", path.display()))?
        == 2
        && &magic == b"P5";
    let frame = if is_pgm {
        load_pgm(path)?
    } else {
        let (Some(w), Some(h)) = (grid.width, grid.height) else {
            bail!("{} is not a PGM file; raw input needs --width and --height", path.display());
        };
        load_raw_y8(path, w, h, index)?
    };
    Ok(frame)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_field(path: &Path, grid: &GridArgs) -> Result<MotionField> {
    let field = parse_field(&read_text(path)?, grid.max_block).with_context(|| format!("parsing {}", path.display()))?;
    grid.check(field.geom(), field.d_max())?;
    Ok(field)
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let mut paths = vec![&a.reference, &a.target];
    paths.extend(&a.next);
    ensure!(
        a.index.is_empty() || a.index.len() == paths.len(),
        "--index needs one entry per input frame ({})",
        paths.len()
    );
    ensure!(
        (a.mode == CodingMode::Temporal3d) == a.next.is_some(),
        "3d mode takes exactly three frames, other modes two"
    );
    let frames = paths
        .iter()
        .enumerate()
        .map(|(i, p)| load_frame(p, &a.grid, a.index.get(i).copied().unwrap_or(0)))
        .collect::<Result<Vec<_>>>()?;
    let geom = a.grid.geometry(frames[0].width(), frames[0].height())?;
    for f in &frames {
        validate_geometry(f, &geom)?;
    }
    let params = SearchParams {
        d_max: a.grid.dmax,
        mode: match a.search {
            Search::Cds => SearchMode::ConjugateDirection,
            Search::Full => SearchMode::Full,
        },
        ..SearchParams::default()
    };
    params.validate()?;

    let field = estimate_field(&frames[0], &frames[1], &geom, &params)?;
    report_prediction(&frames[0], &frames[1], &field)?;
    match a.mode {
        CodingMode::Inter => write_text(&a.output, &write_field(&field))?,
        CodingMode::Mixed => {
            let decisions = decide_field(&field, &frames[0], &frames[1], &a.penalty.policy()?)?;
            let modes: Vec<Mode> = decisions.iter().map(|d| d.mode()).collect();
            let intra = modes.iter().filter(|m| **m == Mode::Intra).count();
            println!("intra blocks:        {intra} of {}", modes.len());
            write_text(&a.output, &write_modes(&geom, field.d_max(), &modes))?;
        }
        CodingMode::Temporal3d => {
            let later_out = a.later_output.as_ref().context("3d mode needs --later-output")?;
            let later = estimate_field(&frames[1], &frames[2], &geom, &params)?;
            report_prediction(&frames[1], &frames[2], &later)?;
            write_text(&a.output, &write_field(&field))?;
            write_text(later_out, &write_field(&later))?;
        }
    }
    Ok(())
}

fn report_prediction(reference: &Frame, target: &Frame, field: &MotionField) -> Result<()> {
    let pred = write_prediction(reference, field)?;
    let out = fill_holes(&pred, reference)?;
    println!(
        "frame MAD before:    {:.4}\nframe MAD predicted: {:.4}",
        frame_mad(reference, target)?,
        frame_mad(&out, target)?
    );
    Ok(())
}

fn encode(a: &EncodeArgs) -> Result<()> {
    let text = read_text(&a.field)?;
    let kind = sniff(&text).with_context(|| format!("{} is not a field file", a.field.display()))?;
    let mode = a.mode.unwrap_or(match (kind, &a.later) {
        ("mixfield", _) => CodingMode::Mixed,
        (_, Some(_)) => CodingMode::Temporal3d,
        _ => CodingMode::Inter,
    });
    ensure!(
        (mode == CodingMode::Temporal3d) == a.later.is_some(),
        "3d mode takes two field files, other modes one"
    );
    ensure!(
        (mode == CodingMode::Mixed) == (kind == "mixfield"),
        "mixed mode needs a mixfield file and the other modes an mvfield file"
    );
    let policy = MergePolicy::relaxed(a.merge_t);

    let (geom, d_max, container_mode, payload, report) = match mode {
        CodingMode::Inter => {
            let field = load_field(&a.field, &a.grid)?;
            let forest = build_bottom_up(&field, field.geom(), policy)?;
            let bits = encode_interframe(&forest, a.flag)?;
            (*field.geom(), field.d_max(), ContainerMode::Interframe, bits, cost_report(&forest, a.flag))
        }
        CodingMode::Mixed => {
            let (geom, d_max, modes) =
                parse_modes(&text, a.grid.max_block).with_context(|| format!("parsing {}", a.field.display()))?;
            a.grid.check(&geom, d_max)?;
            let forest = MixedForest::from_modes(&geom, d_max, &modes, policy)?;
            let bits = if a.flag {
                encode_mixed_auto(&forest)?
            } else {
                encode_mixed(&forest, false)?
            };
            if a.flag && bits.bytes()[0] & 0x80 == 0 {
                println!("flat decision path chosen");
            }
            (geom, d_max, ContainerMode::Mixed, bits, mixed_cost_report(&forest, a.flag))
        }
        CodingMode::Temporal3d => {
            let earlier = load_field(&a.field, &a.grid)?;
            let later = load_field(a.later.as_ref().unwrap(), &a.grid)?;
            let geom = *earlier.geom();
            let pair = FieldPair::new(earlier, later)?;
            let forest = build_3d(&pair, &geom, policy)?;
            let bits = encode_3d(&forest, a.flag)?;
            let mut report = cost_report_3d(&forest);
            if a.flag {
                report = with_flag_bit(report);
            }
            (geom, pair.earlier.d_max(), ContainerMode::Temporal3d, bits, report)
        }
    };

    println!("{report}");
    println!("stream bytes: {}", payload.byte_len());
    Container {
        geom,
        d_max,
        mode: container_mode,
        flag: a.flag,
        payload,
    }
    .write(&a.output)?;
    Ok(())
}

fn with_flag_bit(mut r: CostReport) -> CostReport {
    r.flag_bits = 1;
    r.total_bytes = r.total_bits().div_ceil(8);
    r.ratio_percent = 100.0 * r.total_bytes as f64 / r.baseline.units() as f64;
    r
}

fn decode(a: &DecodeArgs) -> Result<()> {
    let c = Container::read(&a.container)?;
    match c.mode {
        ContainerMode::Interframe => {
            let forest = decode_interframe(&c.payload, &c.geom, c.d_max, c.flag)?;
            write_text(&a.output, &write_field(&flatten(&forest)))?;
        }
        ContainerMode::Mixed => {
            let forest = decode_mixed(&c.payload, &c.geom, c.d_max, c.flag)?;
            write_text(&a.output, &write_modes(&c.geom, c.d_max, &forest.flatten()))?;
        }
        ContainerMode::Temporal3d => {
            let later_out = a.later_output.as_ref().context("3d containers need --later-output")?;
            let pair = flatten_3d(&decode_3d(&c.payload, &c.geom, c.d_max, c.flag)?);
            write_text(&a.output, &write_field(&pair.earlier))?;
            write_text(later_out, &write_field(&pair.later))?;
        }
    }
    Ok(())
}

fn reconstruct(a: &ReconstructArgs) -> Result<()> {
    let reference = load_frame(&a.reference, &a.grid, a.index)?;
    let field = load_field(&a.field, &a.grid)?;
    validate_geometry(&reference, field.geom())?;
    let pred = write_prediction(&reference, &field)?;
    println!("holes:    {}", pred.hole_count);
    println!("overlaps: {}", pred.overlap_count);
    let out = if a.no_fill {
        pred.predicted
    } else {
        fill_holes(&pred, &reference)?
    };
    if let Some(path) = &a.compare {
        let target = load_frame(path, &a.grid, a.index + 1)?;
        println!("MAD vs {}: {:.4}", path.display(), frame_mad(&out, &target)?);
    }
    store_pgm(&out, &a.output)?;
    Ok(())
}

fn bounds(a: &BoundsArgs) -> Result<()> {
    let (Some(w), Some(h)) = (a.grid.width, a.grid.height) else {
        bail!("bounds needs --width and --height");
    };
    let geom = a.grid.geometry(w, h)?;
    let (best, worst, unit) = match a.mode {
        CodingMode::Inter => {
            let (b, w) = theoretical_bounds(&geom, a.flag);
            (b, w, "N")
        }
        CodingMode::Mixed => {
            let (b, w) = mixed_bounds(&geom, a.flag);
            (b, w, "")
        }
        CodingMode::Temporal3d => bail!("bounds are defined for inter and mixed mode"),
    };
    let short = |r: &CostReport| {
        if unit.is_empty() {
            r.fraction()
        } else {
            format!("{unit}:{}", r.coded_units())
        }
    };
    println!("{:<8}{:>12}{:>12}", "CASE", "RATIO", "FRACTION");
    for (name, r) in [("best", &best), ("worst", &worst)] {
        println!("{name:<8}{:>12}{:>12}", r.ratio_integer(), short(r));
    }
    let n = if unit.is_empty() { String::new() } else { format!("  ({unit} = {})", best.baseline.units()) };
    println!("{} / {}{n}", short(&best), short(&worst));
    Ok(())
}

fn report(a: &ReportArgs) -> Result<()> {
    if let Some(which) = a.synthetic {
        let field = match which {
            Synthetic::Coarse => synthetic::coarse_field(a.seed),
            Synthetic::Fine => synthetic::fine_field(a.seed),
        };
        let forest = build_bottom_up(&field, field.geom(), MergePolicy::Exact)?;
        println!("{}", cost_report(&forest, false));
        if let Some(path) = &a.field_output {
            write_text(path, &write_field(&field))?;
        }
        return Ok(());
    }
    let c = Container::read(a.container.as_ref().unwrap())?;
    let report = match c.mode {
        ContainerMode::Interframe => cost_report(&decode_interframe(&c.payload, &c.geom, c.d_max, c.flag)?, c.flag),
        ContainerMode::Mixed => mixed_cost_report(&decode_mixed(&c.payload, &c.geom, c.d_max, c.flag)?, c.flag),
        ContainerMode::Temporal3d => {
            let r = cost_report_3d(&decode_3d(&c.payload, &c.geom, c.d_max, c.flag)?);
            if c.flag {
                with_flag_bit(r)
            } else {
                r
            }
        }
    };
    println!("{report}");
    println!("stream bytes: {}", c.payload.byte_len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Bounds(a) => bounds(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
