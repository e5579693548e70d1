use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use zerofree_core::bounds::restrict_interval;
use zerofree_core::format::fixed7;
use zerofree_core::kkt_solver::FEASIBILITY_TOL;
use zerofree_core::oracle::{audit as run_audit, OracleConfig};
use zerofree_core::pipeline::{subproblem_csvs, sweep as run_sweep, sweep_csv};
use zerofree_core::trigpoly::{membership_c_n, v_functional};
use zerofree_core::{CosinePolynomial, Error, Pipeline, PipelineConfig};

use crate::config::FileSettings;
use crate::SolveFlags;

pub enum Failure {
    Usage(String),
    Certification(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Certification(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Certification(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CertificationFailed(_) => Failure::Certification(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn pipeline_config(flags: &SolveFlags, file: &FileSettings) -> Result<PipelineConfig, Failure> {
    let defaults = PipelineConfig::default();
    let cfg = PipelineConfig {
        grid_points: flags.grid.or(file.grid).unwrap_or(defaults.grid_points),
        seed: flags.seed.or(file.seed).unwrap_or(defaults.seed),
        restarts: flags.restarts.or(file.restarts).unwrap_or(defaults.restarts),
        jobs: flags.jobs.or(file.jobs).unwrap_or(defaults.jobs),
        reference_bounds: flags.strict_paper_bounds || file.strict_paper_bounds.unwrap_or(false),
        ..defaults
    };
    if cfg.grid_points < 2 {
        return Err(Failure::Usage("--grid must be at least 2".into()));
    }
    if cfg.restarts == 0 || cfg.jobs == 0 {
        return Err(Failure::Usage("--restarts and --jobs must be positive".into()));
    }
    Ok(cfg)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn compute(flags: &SolveFlags, file: &FileSettings, out: Option<&Path>) -> Outcome {
    let cfg = pipeline_config(flags, file)?;
    let n = flags.n.into();
    let result = Pipeline::new(cfg).compute(n)?;
    eprintln!("V{n} = {} at a = {}", fixed7(result.v_value), fixed7(result.a_star));
    write_or_print(out, &pretty(&serde_json::to_value(&result).expect("serializable")))?;
    if result.certified {
        Ok(())
    } else {
        Err(Failure::Certification(format!("witness for n = {n} is not certified")))
    }
}

fn subproblem_path(csv: Option<&Path>, n: usize, id: usize) -> PathBuf {
    match csv {
        Some(p) => {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
            p.with_file_name(format!("{stem}_sub{id}.csv"))
        }
        None => PathBuf::from(format!("sweep_n{n}_sub{id}.csv")),
    }
}

pub fn sweep(flags: &SolveFlags, file: &FileSettings, csv: Option<&Path>, subproblems: bool) -> Outcome {
    let n: usize = flags.n.into();
    if n < 4 {
        return Err(Failure::Usage("sweeps apply to 4 ≤ n ≤ 8; degrees 2 and 3 have closed forms".into()));
    }
    let cfg = pipeline_config(flags, file)?;
    let mut pipeline = Pipeline::new(cfg.clone());
    let interval = pipeline.interval(n)?;
    let records = run_sweep(n, interval, cfg.grid_points, &cfg)?;
    write_or_print(csv, &sweep_csv(&records))?;
    if subproblems {
        for (act, table) in subproblem_csvs(n, &records) {
            let path = subproblem_path(csv, n, act.id);
            fs::write(&path, table).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("subproblem {} {} -> {}", act.id, act.label(), path.display());
        }
    }
    Ok(())
}

fn read_polynomial(path: &Path) -> Result<CosinePolynomial, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid JSON: {e}")))?;
    let coeffs = match &value {
        Value::Array(_) => &value,
        Value::Object(map) => map.get("coeffs").or_else(|| map.get("witness_coeffs")).ok_or_else(|| {
            Failure::Usage("expected a `coeffs` array".into())
        })?,
        _ => return Err(Failure::Usage("expected a JSON array or object".into())),
    };
    let coeffs: Vec<f64> =
        serde_json::from_value(coeffs.clone()).map_err(|e| Failure::Usage(format!("invalid coefficients: {e}")))?;
    Ok(CosinePolynomial::new(coeffs)?)
}

pub fn verify(path: &Path) -> Outcome {
    let poly = read_polynomial(path)?;
    let membership = membership_c_n(&poly, FEASIBILITY_TOL);
    let v = v_functional(&poly).ok();
    let report = json!({
        "degree": poly.degree(),
        "membership": membership,
        "v": v,
        "R": v.map(|v| v / 2.0),
    });
    print!("{}", pretty(&report));
    match v {
        Some(v) => eprintln!("v = {}, R = {}", fixed7(v), fixed7(v / 2.0)),
        None => eprintln!("v undefined: requires a₁ > a₀ > 0"),
    }
    if membership.in_class {
        Ok(())
    } else {
        let tags: Vec<&str> = membership.violated_conditions.iter().map(|c| c.tag()).collect();
        Err(Failure::Certification(format!("not in the class: {}", tags.join(", "))))
    }
}

pub fn bounds(n: usize, upper: f64) -> Outcome {
    let report = match restrict_interval(n, upper) {
        Ok(r) => json!({ "n": n, "upper": upper, "restricted": true, "interval": [r.a_lo, r.a_hi], "detail": r }),
        Err(Error::NoRestriction { lo, hi }) => {
            json!({ "n": n, "upper": upper, "restricted": false, "interval": [lo, hi] })
        }
        Err(e) => return Err(e.into()),
    };
    let lo = report["interval"][0].as_f64().unwrap_or(f64::NAN);
    let hi = report["interval"][1].as_f64().unwrap_or(f64::NAN);
    eprintln!("a ∈ [{}, {}]", fixed7(lo), fixed7(hi));
    print!("{}", pretty(&report));
    Ok(())
}

pub fn audit(flags: &SolveFlags, file: &FileSettings, samples: Option<usize>) -> Outcome {
    let n: usize = flags.n.into();
    let cfg = pipeline_config(flags, file)?;
    let oracle = OracleConfig {
        samples: samples.or(file.samples).unwrap_or(OracleConfig::default().samples),
        seed: cfg.seed,
        restarts: cfg.restarts,
        ..OracleConfig::default()
    };
    let mut pipeline = Pipeline::new(cfg);
    let report = run_audit(n, &mut pipeline, &oracle)?;
    print!("{}", pretty(&serde_json::to_value(&report).expect("serializable")));
    eprintln!("V{n} = {}, {} points audited", fixed7(report.v), report.points.len());
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Certification("oracle sandwich failed".into()))
    }
}
