use std::path::PathBuf;

use clap::Args;

use chainwatch_core::data::{generate, save_records, AttackClass, SyntheticSpec};
use chainwatch_core::error::{Error, Result};

/// Generate a seeded synthetic dataset file.
#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Output dataset file.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,

    /// JSON synthesis spec; replaces the scale/count flags entirely.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["scale", "seed", "normal", "bp", "dos", "dos_gas", "oau", "fot"])]
    pub spec: Option<PathBuf>,

    /// Scale factor applied to the reference class mix
    /// (600000/25293/100000/91128/50998/100000).
    #[arg(long, default_value_t = 0.01)]
    pub scale: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Per-class count overrides (0 drops the class).
    #[arg(long)]
    pub normal: Option<usize>,
    #[arg(long)]
    pub bp: Option<usize>,
    #[arg(long)]
    pub dos: Option<usize>,
    #[arg(long)]
    pub dos_gas: Option<usize>,
    #[arg(long)]
    pub oau: Option<usize>,
    #[arg(long)]
    pub fot: Option<usize>,
}

fn build_spec(args: &GenDataArgs) -> Result<SyntheticSpec> {
    if let Some(path) = &args.spec {
        let text = std::fs::read_to_string(path)?;
        return serde_json::from_str(&text)
            .map_err(|e| Error::domain(format!("spec file {}: {e}", path.display())));
    }
    let mut spec = SyntheticSpec::scaled_reference(args.scale, args.seed)?;
    if let Some(n) = args.normal {
        spec.normal_count = n;
    }
    let overrides = [
        (AttackClass::BruteForcePassword, args.bp),
        (AttackClass::DenialOfService, args.dos),
        (AttackClass::GasLimitDos, args.dos_gas),
        (AttackClass::OverflowUnderflow, args.oau),
        (AttackClass::TransactionFlood, args.fot),
    ];
    for (class, count) in overrides {
        if let Some(n) = count {
            for attack in &mut spec.attacks {
                if attack.class == class {
                    attack.count = n;
                }
            }
        }
    }
    spec.attacks.retain(|a| a.count > 0);
    Ok(spec)
}

pub fn cmd_gen_data(args: &GenDataArgs) -> Result<()> {
    let spec = build_spec(args)?;
    let ds = generate(&spec)?;
    save_records(&ds, &args.out)?;
    println!("wrote {} records to {}", ds.len(), args.out.display());
    for (class, count) in ds.class_counts() {
        println!("  {class}: {count}");
    }
    Ok(())
}
