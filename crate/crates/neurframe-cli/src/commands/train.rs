use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::{bail, Context, Result};

use neurframe_core::field::save_checkpoint;
use neurframe_core::{csv_line, train, Mlp, TrainConfig, TrainingData, CSV_HEADER};

use crate::bundle::{self, hex};
use crate::commands::env_seed;
use crate::manifest::{RunManifest, Stage};
use crate::{CliError, TrainArgs};

pub const CHECKPOINT_FILE: &str = "checkpoint.nfck";
pub const LOSS_FILE: &str = "loss.csv";

/// Precedence: flags, then the config file, then NEURFRAME_SEED (seed only),
/// then defaults. The env var outranks the file so a run config can be
/// re-seeded without editing it; an explicit --seed still wins.
pub fn resolve_config(args: &TrainArgs, env_seed: Option<u64>) -> Result<TrainConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => TrainConfig::default(),
    };
    if let Some(s) = env_seed {
        config.seed = s;
    }
    if let Some(v) = args.iterations {
        config.iterations = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.learning_rate {
        config.learning_rate = v;
    }
    if let Some(v) = args.lambda_smooth {
        config.lambda_smooth = v;
    }
    if let Some(v) = args.lambda_boundary {
        config.lambda_boundary = v;
    }
    if let Some(v) = args.lambda_feature {
        config.lambda_feature = v;
    }
    if let Some(v) = args.sigma {
        config.sigma = v;
    }
    if let Some(v) = args.minibatch {
        if v == 0 {
            bail!("--minibatch must be positive");
        }
        config.minibatch = Some(v);
    }
    if let Some(v) = args.log_every {
        if v == 0 {
            bail!("--log-every must be positive");
        }
        config.log_every = v;
    }
    if let Some(v) = args.checkpoint_every {
        if v == 0 {
            bail!("--checkpoint-every must be positive");
        }
        config.checkpoint_every = Some(v);
    }
    Ok(config)
}

pub fn run(args: TrainArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("train");

    let load = Stage::start();
    let bundle = bundle::load_bundle(&args.bundle).map_err(CliError::Input)?;
    let config = resolve_config(&args, env_seed()?).map_err(CliError::Input)?;
    load.record(&mut manifest, "load");

    manifest.seed = Some(config.seed);
    manifest.config = serde_json::to_value(&config).map_err(anyhow::Error::from)?;
    manifest.inputs.insert("bundle".into(), hex(&bundle.hash));
    if let Some(path) = &args.config {
        let bytes = std::fs::read(path).map_err(anyhow::Error::from)?;
        manifest.inputs.insert("config".into(), hex(&bundle::sha256_bytes(&bytes)));
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating run directory {}", args.out.display()))
        .map_err(CliError::Input)?;

    let work = Stage::start();
    let data = TrainingData::new(&bundle.pre, config.sigma);
    let mut mlp = Mlp::standard(config.seed);

    let csv = File::create(args.out.join(LOSS_FILE)).map_err(anyhow::Error::from)?;
    let mut csv = BufWriter::new(csv);
    writeln!(csv, "{CSV_HEADER}").map_err(anyhow::Error::from)?;

    let periodic = config.checkpoint_every;
    let out_dir = args.out.clone();
    let transform = bundle.pre.transform;
    let bundle_hash = bundle.hash;
    let log_every = config.log_every;
    let mut periodic_files: Vec<String> = Vec::new();
    let report = train(&mut mlp, &data, &config, |i, terms, total, net| {
        if i % log_every == 0 {
            writeln!(csv, "{}", csv_line(i, terms, total))?;
        }
        if let Some(n) = periodic {
            if (i + 1) % n == 0 {
                let name = format!("checkpoint_{:06}.nfck", i + 1);
                save_checkpoint(&out_dir.join(&name), net, &transform, &bundle_hash)
                    .map_err(std::io::Error::other)?;
                periodic_files.push(name);
            }
        }
        Ok(())
    })
    .map_err(CliError::from_train)?;
    csv.flush().map_err(anyhow::Error::from)?;
    work.record(&mut manifest, "train");

    let write = Stage::start();
    save_checkpoint(&args.out.join(CHECKPOINT_FILE), &mlp, &transform, &bundle_hash)
        .map_err(anyhow::Error::from)?;
    write.record(&mut manifest, "write");

    manifest.outputs = vec![CHECKPOINT_FILE.into(), LOSS_FILE.into()];
    manifest.outputs.extend(periodic_files);
    manifest.stats = serde_json::json!({
        "iterations": report.iterations,
        "initial_total": report.initial.map(|t| t.total(&config.weights())),
        "final_total": report.final_terms.map(|t| t.total(&config.weights())),
    });
    manifest.write(&args.out).map_err(CliError::Input)?;

    match (report.initial, report.final_terms) {
        (Some(first), Some(last)) => println!(
            "trained {} iterations over {}: loss {:.6e} -> {:.6e}",
            report.iterations,
            bundle.meta.source,
            first.total(&config.weights()),
            last.total(&config.weights()),
        ),
        _ => println!("trained 0 iterations: checkpoint equals initialization"),
    }
    println!("wrote {}", args.out.join(CHECKPOINT_FILE).display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TrainArgs;

    fn bare_args() -> TrainArgs {
        TrainArgs {
            bundle: "unused".into(),
            config: None,
            iterations: None,
            seed: None,
            learning_rate: None,
            lambda_smooth: None,
            lambda_boundary: None,
            lambda_feature: None,
            sigma: None,
            minibatch: None,
            log_every: None,
            checkpoint_every: None,
            out: "unused".into(),
        }
    }

    #[test]
    fn defaults_apply_without_file_or_flags() {
        let config = resolve_config(&bare_args(), None).unwrap();
        assert_eq!(config, TrainConfig::default());
    }

    #[test]
    fn flags_override_file_and_env() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{ "iterations": 42, "seed": 5, "sigma": 3.0 }"#).unwrap();

        let mut args = bare_args();
        args.config = Some(path.clone());
        args.iterations = Some(7);
        args.seed = Some(9);
        let config = resolve_config(&args, Some(100)).unwrap();
        assert_eq!(config.iterations, 7);
        assert_eq!(config.seed, 9);
        assert_eq!(config.sigma, 3.0);

        // env outranks the file but loses to the flag
        let mut args = bare_args();
        args.config = Some(path);
        let config = resolve_config(&args, Some(100)).unwrap();
        assert_eq!(config.seed, 100);
        assert_eq!(config.iterations, 42);
    }

    #[test]
    fn bad_values_are_rejected() {
        let mut args = bare_args();
        args.minibatch = Some(0);
        assert!(resolve_config(&args, None).is_err());

        let mut args = bare_args();
        args.checkpoint_every = Some(0);
        assert!(resolve_config(&args, None).is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{ "iterattions": 1 }"#).unwrap();
        let mut args = bare_args();
        args.config = Some(path);
        assert!(resolve_config(&args, None).is_err());
    }
}
