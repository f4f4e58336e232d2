use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sparsemask::bench::{
    aggregate, density_range, emit_csv, generate_mask, load_corpus, records_to_csv, run_benchmark, synthetic_corpus,
    BenchPlan, Distribution, GroupKey, SelectionParams,
};
use sparsemask::image_io::{read_container, read_pbm, read_pgm, write_container, write_pbm, write_pbm_ascii, write_pgm};
use sparsemask::repr::ReprForm;
use sparsemask::{decode_mask, encode_mask, CodecId};

#[derive(Parser, Debug)]
#[command(name = "sparsemask", version, about = "Generate, encode and benchmark sparse binary inpainting masks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a mask for a grayscale image.
    Gen(GenArgs),
    /// Encode a PBM mask into an SBM1 container.
    Encode {
        #[arg(long)]
        codec: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode an SBM1 container into a PBM mask.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write plain (P1) instead of raw (P4) PBM.
        #[arg(long)]
        ascii: bool,
    },
    /// Print a mask in one of the sparse representations.
    Repr {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        form: String,
        /// Print on one line, with COO pairs in parentheses and CSR parts split by `|`.
        #[arg(long)]
        inline: bool,
    },
    /// Print the Shannon entropy of a representation's symbol stream, in bits per symbol.
    Entropy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        form: String,
    },
    /// Sweep codecs over mask families and densities.
    Bench(BenchArgs),
    /// Write a synthetic PGM corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct SelectionArgs {
    /// Sparsification candidate fraction.
    #[arg(long)]
    p: Option<f64>,
    /// Sparsification removal fraction.
    #[arg(long)]
    q: Option<f64>,
    /// Densification batch size.
    #[arg(long)]
    batch: Option<usize>,
    /// Densification candidates examined per added point.
    #[arg(long)]
    candidates: Option<usize>,
}

impl SelectionArgs {
    fn params(&self) -> SelectionParams {
        let mut s = SelectionParams::default();
        if let Some(p) = self.p {
            s.candidate_fraction = p;
        }
        if let Some(q) = self.q {
            s.removal_fraction = q;
        }
        if self.batch.is_some() {
            s.batch_size = self.batch;
        }
        if let Some(c) = self.candidates {
            s.candidates_per_point = c;
        }
        s
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    image: PathBuf,
    /// random, sparsify or densify.
    #[arg(long)]
    dist: String,
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    selection: SelectionArgs,
    #[arg(long)]
    out: PathBuf,
    /// Also write the reconstruction used by the chosen family.
    #[arg(long)]
    reconstruction: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Directory of PGM images; a synthetic corpus is used when omitted.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Comma-separated codec names, or `all`.
    #[arg(long, default_value = "all")]
    codecs: String,
    /// `a..b` (one-point steps) or a comma-separated list of fractions.
    #[arg(long, default_value = "0.01..0.10")]
    densities: String,
    /// Comma-separated families, or `all`.
    #[arg(long, default_value = "all")]
    dists: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: PathBuf,
    /// Also write group means; keys from codec,image,distribution,density.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, default_value = "distribution,codec")]
    group_by: String,
    #[arg(long)]
    include_header: bool,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[command(flatten)]
    selection: SelectionArgs,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn parse_form(name: &str) -> Result<ReprForm> {
    ReprForm::from_name(name).ok_or_else(|| anyhow!("unknown form '{name}' (vector, rle, coo, csr)"))
}

fn parse_codecs(list: &str) -> Result<Vec<CodecId>> {
    if list == "all" {
        return Ok(CodecId::ALL.to_vec());
    }
    list.split(',')
        .map(|n| CodecId::from_name(n.trim()).ok_or_else(|| anyhow!("unknown codec '{}'", n.trim())))
        .collect()
}

fn parse_dists(list: &str) -> Result<Vec<Distribution>> {
    if list == "all" {
        return Ok(Distribution::ALL.to_vec());
    }
    list.split(',')
        .map(|n| Distribution::from_name(n.trim()).ok_or_else(|| anyhow!("unknown distribution '{}'", n.trim())))
        .collect()
}

fn parse_densities(arg: &str) -> Result<Vec<f64>> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| anyhow!("bad density '{}'", s.trim()));
    let out = match arg.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                bail!("empty density range {arg}");
            }
            density_range(a, b)
        }
        None => arg.split(',').map(num).collect::<Result<_>>()?,
    };
    if let Some(d) = out.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        bail!("density {d} outside (0, 1)");
    }
    Ok(out)
}

fn parse_group_by(list: &str) -> Result<Vec<GroupKey>> {
    list.split(',')
        .map(|n| GroupKey::from_name(n.trim()).ok_or_else(|| anyhow!("unknown group key '{}'", n.trim())))
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => {
            let dist = Distribution::from_name(&a.dist)
                .ok_or_else(|| anyhow!("unknown distribution '{}' (random, sparsify, densify)", a.dist))?;
            if !(0.0..=1.0).contains(&a.density) {
                bail!("density {} outside [0, 1]", a.density);
            }
            let image = read_pgm(&read(&a.image)?).with_context(|| format!("{}", a.image.display()))?;
            let mask = generate_mask(&image, dist, a.density, a.seed, &a.selection.params())?;
            write(&a.out, &write_pbm(&mask))?;
            if let Some(path) = a.reconstruction {
                let u = match dist {
                    Distribution::DensifyShepard => sparsemask::mask_gen::inpaint_shepard(&image, &mask)?,
                    _ => sparsemask::mask_gen::inpaint_homogeneous(&image, &mask, &Default::default())?,
                };
                let rounded = sparsemask::GrayImage::from_fn(u.width(), u.height(), |x, y| u.get(x, y).round());
                write(&path, &write_pgm(&rounded))?;
            }
        }
        Command::Encode { codec, input, out } => {
            let id = CodecId::from_name(&codec).ok_or_else(|| anyhow!("unknown codec '{codec}'"))?;
            let mask = read_pbm(&read(&input)?).with_context(|| format!("{}", input.display()))?;
            write(&out, &write_container(&encode_mask(id, &mask)?))?;
        }
        Command::Decode { input, out, ascii } => {
            let encoded = read_container(&read(&input)?).with_context(|| format!("{}", input.display()))?;
            let mask = decode_mask(&encoded)?;
            write(&out, &if ascii { write_pbm_ascii(&mask) } else { write_pbm(&mask) })?;
        }
        Command::Repr { input, form, inline } => {
            let form = parse_form(&form)?;
            let mask = read_pbm(&read(&input)?).with_context(|| format!("{}", input.display()))?;
            println!("{}", if inline { form.inline(&mask) } else { form.dump(&mask) });
        }
        Command::Entropy { input, form } => {
            let form = parse_form(&form)?;
            let mask = read_pbm(&read(&input)?).with_context(|| format!("{}", input.display()))?;
            let h = form.entropy(&mask).ok_or_else(|| anyhow!("{} stream is empty", form.name()))?;
            println!("{h}");
        }
        Command::Bench(a) => {
            let mut plan = BenchPlan::new(match &a.corpus {
                Some(dir) => load_corpus(dir)?,
                None => synthetic_corpus(10, 128, a.seed),
            });
            plan.codecs = parse_codecs(&a.codecs)?;
            plan.densities = parse_densities(&a.densities)?;
            plan.distributions = parse_dists(&a.dists)?;
            plan.seed = a.seed;
            plan.repetitions = a.reps;
            plan.include_header = a.include_header;
            plan.selection = a.selection.params();
            let group_by = parse_group_by(&a.group_by)?;
            let records = run_benchmark(&plan)?;
            write(&a.csv, &records_to_csv(&records)?)?;
            if let Some(path) = a.summary {
                write(&path, &emit_csv(&aggregate(&records, &group_by)?)?)?;
            }
        }
        Command::Synth { out, count, size, seed } => {
            if size == 0 {
                bail!("size must be positive");
            }
            fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
            for img in synthetic_corpus(count, size, seed) {
                write(&out.join(format!("{}.pgm", img.id)), &write_pgm(&img.image))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
