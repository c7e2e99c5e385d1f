use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::Args;

use chainwatch_core::data::parse_feature_fields;
use chainwatch_core::error::Result;
use chainwatch_core::model::{decide, DaeMlp};

use super::{load_model_at, require_calibrated};

/// Stream rows through a calibrated model, one verdict line per input line.
#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,

    /// Input rows (dataset format, with or without label columns);
    /// '-' reads stdin.
    #[arg(long, default_value = "-", value_name = "PATH")]
    pub input: String,

    /// Verdict stream (TSV: id, score, decision, tau); '-' writes stdout.
    #[arg(long, default_value = "-", value_name = "PATH")]
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectStats {
    pub records: usize,
    pub errors: usize,
}

/// The streaming loop: order-preserving, one flushed line per record;
/// malformed lines produce an error verdict and the stream continues.
pub fn run_detect(model: &DaeMlp, mut reader: impl BufRead, mut writer: impl Write) -> Result<DetectStats> {
    let tau = require_calibrated(model)?;
    let scaler = model.scaler().ok_or_else(|| {
        chainwatch_core::Error::domain("model carries no feature scaler; retrain it with `chainwatch train`")
    })?;

    let mut scorer = model.scorer();
    let mut stats = DetectStats { records: 0, errors: 0 };
    let mut id = 0usize;
    let mut line = String::new();
    let mut line_no = 0usize;

    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        line_no += 1;
        let trimmed = line.trim_end_matches(['\n', '\r']);
        if trimmed.is_empty() {
            continue;
        }
        if line_no == 1 && trimmed.starts_with("f01,") {
            continue;
        }
        match parse_feature_fields(trimmed, line_no) {
            Ok(raw) => {
                let scaled = scaler.scale_features(&raw);
                match scorer.score(&scaled) {
                    Ok(parts) => {
                        writeln!(writer, "{id}\t{}\t{}\t{tau}", parts.score, decide(parts.score, tau))?;
                    }
                    Err(e) => {
                        stats.errors += 1;
                        writeln!(writer, "{id}\t-\terror: {e}\t{tau}")?;
                    }
                }
            }
            Err(e) => {
                stats.errors += 1;
                writeln!(writer, "{id}\t-\terror: {e}\t{tau}")?;
            }
        }
        writer.flush()?;
        stats.records += 1;
        id += 1;
    }
    Ok(stats)
}

pub fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let model = load_model_at(&args.model)?;

    let stats = match (args.input.as_str(), args.output.as_str()) {
        ("-", "-") => {
            let stdin = std::io::stdin();
            let stdout = std::io::stdout();
            run_detect(&model, stdin.lock(), stdout.lock())?
        }
        (input, "-") => {
            let stdout = std::io::stdout();
            run_detect(&model, BufReader::new(File::open(input)?), stdout.lock())?
        }
        ("-", output) => {
            let stdin = std::io::stdin();
            run_detect(&model, stdin.lock(), BufWriter::new(File::create(output)?))?
        }
        (input, output) => run_detect(
            &model,
            BufReader::new(File::open(input)?),
            BufWriter::new(File::create(output)?),
        )?,
    };
    eprintln!("detect: {} records, {} malformed", stats.records, stats.errors);
    Ok(())
}
