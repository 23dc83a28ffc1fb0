use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qmemlab::bath::{bath_audit, build_spectral_density, AuditOptions, DensitySpec};
use qmemlab::davies::{davies_properties, kitaev_gaps, KitaevGapConfig, PropertiesConfig};
use qmemlab::errormap::{errormap_audit, ErrormapConfig};
use qmemlab::memory::{lifetime_study, LifetimePlan, StudyModel};

use crate::config::{canonical, config_hash, load_config, ExperimentConfig, Format};
use crate::output::{unix_now, Manifest, OutputDir};
use crate::{CliError, Command, CommonArgs};

/// Parameters of `bath-audit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathAuditParams {
    pub density: DensitySpec,
    pub options: AuditOptions,
}

impl Default for BathAuditParams {
    fn default() -> Self {
        BathAuditParams {
            density: DensitySpec::FlatKms { amplitude: 1.0, cutoff: 10.0, beta: 1.0 },
            options: AuditOptions::default(),
        }
    }
}

fn kitaev_lifetime_defaults() -> LifetimePlan {
    LifetimePlan { model: StudyModel::KitaevSector, sizes: vec![2, 3, 4], betas: vec![1.0], ..Default::default() }
}

/// Loads the config, applies CLI overrides, runs `body`, writes the manifest.
fn execute<P, F>(name: &str, args: &CommonArgs, defaults: P, seed_slot: fn(&mut P) -> Option<&mut u64>, body: F) -> Result<(), CliError>
where
    P: Serialize + DeserializeOwned,
    F: FnOnce(&ExperimentConfig<P>, &mut OutputDir) -> Result<(), CliError>,
{
    let started = Instant::now();
    let started_unix = unix_now();
    let mut cfg = load_config(args.config.as_deref(), name, &defaults)?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    let seed = match (cfg.seed, seed_slot(&mut cfg.params)) {
        (Some(s), Some(slot)) => {
            *slot = s;
            Some(s)
        }
        (None, Some(slot)) => Some(*slot),
        (s, None) => s,
    };
    cfg.seed = seed;
    let root: PathBuf = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out").join(name));
    // the hash identifies the experiment, not where it was written
    cfg.out = None;
    let hash = config_hash(&canonical(&cfg)?);
    cfg.out = Some(root.clone());
    let text = canonical(&cfg)?;
    let mut out = OutputDir::create(&root)?;
    out.write_str("config.toml", &text)?;
    let result = body(&cfg, &mut out);
    let manifest = Manifest {
        command: name.to_string(),
        config_hash: hash,
        seed,
        threads: rayon::current_num_threads(),
        versions: Manifest::versions(),
        started_unix,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        outputs: out.written().to_vec(),
    };
    out.write_json("manifest.json", &manifest)?;
    result
}

fn csv_rows<T: Serialize>(rows: &[T]) -> impl FnOnce(&mut dyn Write) -> Result<(), CliError> + '_ {
    move |w| {
        let mut c = csv::Writer::from_writer(w);
        for r in rows {
            c.serialize(r)?;
        }
        c.flush()?;
        Ok(())
    }
}

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::BathAudit(args) => execute("bath-audit", args, BathAuditParams::default(), |_| None, |cfg, out| {
            let model = build_spectral_density(&cfg.params.density)?;
            let audit = bath_audit(&model, &cfg.params.options)?;
            if cfg.wants(Format::Json) {
                out.write_json("bath_audit.json", &audit)?;
            }
            println!("tail exponent {:.4}, amplitude {:.4}, η = {:.4e}", audit.tail_exponent, audit.tail_amplitude, audit.r2_constant);
            Ok(())
        }),
        Command::KitaevGap(args) => execute("kitaev-gap", args, KitaevGapConfig::default(), |_| None, |cfg, out| {
            let reports = kitaev_gaps(&cfg.params)?;
            if cfg.wants(Format::Json) {
                out.write_json("kitaev_gap.json", &reports)?;
            }
            if cfg.wants(Format::Csv) {
                #[derive(Serialize)]
                struct Row {
                    l: usize,
                    beta: f64,
                    gap: f64,
                    untwisted_gap: f64,
                    limiting_block: String,
                    states_per_block: usize,
                }
                let rows: Vec<Row> = reports
                    .iter()
                    .map(|r| Row {
                        l: r.l,
                        beta: r.beta,
                        gap: r.gap,
                        untwisted_gap: r.untwisted_gap,
                        limiting_block: format!("{:?}", r.limiting_block).to_lowercase(),
                        states_per_block: r.states_per_block,
                    })
                    .collect();
                out.write_with("kitaev_gap.csv", csv_rows(&rows))?;
            }
            for r in &reports {
                println!("L = {}: gap {:.6} ({:?})", r.l, r.gap, r.limiting_block);
            }
            Ok(())
        }),
        Command::IsingLifetime(args) => lifetime("ising-lifetime", args, LifetimePlan::default()),
        Command::KitaevLifetime(args) => lifetime("kitaev-lifetime", args, kitaev_lifetime_defaults()),
        Command::DaviesProperties(args) => execute(
            "davies-properties",
            args,
            PropertiesConfig::default(),
            |p| Some(&mut p.seed),
            |cfg, out| {
                let report = davies_properties(&cfg.params)?;
                if cfg.wants(Format::Json) {
                    out.write_json("davies_properties.json", &report)?;
                }
                if cfg.wants(Format::Csv) {
                    out.write_with("davies_properties.csv", csv_rows(&report.rows))?;
                }
                let failed = report.rows.iter().filter(|r| !r.passes()).count();
                println!("{} systems checked, {failed} failing", report.rows.len());
                if failed > 0 {
                    return Err(CliError::Numerical(format!("{failed} systems fail a Davies property check")));
                }
                Ok(())
            },
        ),
        Command::ErrormapAudit(args) => execute("errormap-audit", args, ErrormapConfig::default(), |_| None, |cfg, out| {
            let report = errormap_audit(&cfg.params)?;
            if cfg.wants(Format::Json) {
                out.write_json("errormap.json", &report)?;
            }
            if cfg.wants(Format::Csv) {
                out.write_with("support_spectra.csv", |w| Ok(report.write_spectra_csv(w)?))?;
                out.write_with("error_weights.csv", |w| Ok(report.write_weights_csv(w)?))?;
            }
            for b in &report.baths {
                match (&b.verdict, &b.note) {
                    (Some(v), _) => println!("{}: {} (η = {:.4}, R² = {:.4})", b.bath.name(), v.label(), v.eta, v.r_squared),
                    (None, Some(note)) => println!("{}: no verdict, {note}", b.bath.name()),
                    (None, None) => {}
                }
            }
            Ok(())
        }),
    }
}

fn lifetime(name: &str, args: &CommonArgs, defaults: LifetimePlan) -> Result<(), CliError> {
    let kitaev = name == "kitaev-lifetime";
    execute(name, args, defaults, |p| Some(&mut p.seed), |cfg, out| {
        if (cfg.params.model == StudyModel::KitaevSector) != kitaev {
            return Err(CliError::Config(format!("key `params.model`: {:?} does not belong to `{name}`", cfg.params.model)));
        }
        let report = lifetime_study(&cfg.params)?;
        if cfg.wants(Format::Json) {
            out.write_str("lifetime.json", &(report.to_json()? + "\n"))?;
        }
        if cfg.wants(Format::Csv) {
            out.write_with("lifetime.csv", |w| Ok(report.write_csv(w)?))?;
        }
        if cfg.wants(Format::Gnuplot) {
            out.write_with("lifetime.dat", |w| Ok(report.write_gnuplot(w)?))?;
        }
        for r in &report.rows {
            println!("size {} β {} {:?}: γ = {:.4e} ± {:.1e}{}", r.size, r.beta, r.observable, r.gamma, r.stderr, if r.truncated { " (truncated)" } else { "" });
        }
        Ok(())
    })
}
