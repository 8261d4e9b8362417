//! Experiment spec files and dispatch.
//!
//! A spec file is flat `key = value` text with a mandatory `name` and the
//! experiment's parameters; every parameter has a default matching the
//! desk-scale protocol of that experiment, so a minimal spec is just the
//! name and an output directory. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use minmax_mom::data::read_kv_file;
use minmax_mom::datagen::OutlierXScale;
use minmax_mom::error::Error;
use minmax_mom::experiments::{
    run_block_strategy_compare, run_complexity_check, run_corruption_curve, run_outlier_detect,
    run_prop1, run_prop2, run_timing, BlockCompareSpec, ComplexityCheckSpec, CorruptionCurveSpec,
    ExperimentName, ExperimentResult, KPolicy, OutlierDetectSpec, Prop1Spec, Prop2Spec, TimingSpec,
};

struct Spec {
    map: BTreeMap<String, String>,
    used: std::cell::RefCell<Vec<String>>,
}

impl Spec {
    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, Error> {
        self.used.borrow_mut().push(key.to_string());
        match self.map.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse::<T>().map_err(|_| {
                Error::argument(format!("spec value '{raw}' for {key} does not parse"))
            }),
        }
    }

    fn get_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, Error> {
        self.used.borrow_mut().push(key.to_string());
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::argument(format!("bad {key} entry '{p}'")))
                })
                .collect(),
        }
    }

    fn reject_unknown(&self) -> Result<(), Error> {
        let used = self.used.borrow();
        for key in self.map.keys() {
            if key == "name" || key == "out_dir" {
                continue;
            }
            if !used.iter().any(|u| u == key) {
                return Err(Error::argument(format!("unknown spec key '{key}'")));
            }
        }
        Ok(())
    }
}

pub fn cmd_experiment(
    spec_path: Option<PathBuf>,
    out_dir_override: Option<PathBuf>,
    cfg: &BTreeMap<String, String>,
) -> Result<(), Error> {
    let r = crate::config::Resolver::new(cfg, "experiment");
    let spec_path: PathBuf = r.required(spec_path, "spec", "--spec")?;
    let map = read_kv_file(&spec_path).map_err(|e| match e {
        Error::Io(io) => Error::argument(format!("cannot read '{}': {io}", spec_path.display())),
        other => other,
    })?;
    let name_raw = map
        .get("name")
        .ok_or_else(|| Error::argument("spec file is missing 'name'"))?;
    let name = ExperimentName::parse(name_raw)
        .ok_or_else(|| Error::argument(format!("unknown experiment name '{name_raw}'")))?;
    let out_dir = out_dir_override.unwrap_or_else(|| {
        PathBuf::from(map.get("out_dir").cloned().unwrap_or_else(|| ".".into()))
    });
    let spec = Spec {
        map,
        used: std::cell::RefCell::new(Vec::new()),
    };

    let result = dispatch(name, &spec)?;
    spec.reject_unknown()?;
    let (rec, sum) = result.write_csvs(&out_dir)?;
    eprintln!(
        "experiment {}: {} records",
        name.as_str(),
        result.records.len()
    );
    for row in &result.summary {
        eprintln!("  {} {} = {}", row.group, row.metric, row.value);
    }
    eprintln!("wrote {} and {}", rec.display(), sum.display());
    Ok(())
}

fn dispatch(name: ExperimentName, s: &Spec) -> Result<ExperimentResult, Error> {
    match name {
        ExperimentName::CorruptionCurve => {
            let k_policy = match s.get::<String>("k_policy", "fixed".into())?.as_str() {
                "cv" => KPolicy::CvGrid {
                    grid: s.get_list("k_grid", &[1, 3, 11, 31, 101])?,
                    v_folds: s.get("v_folds", 3)?,
                },
                "fixed" => KPolicy::Fixed(s.get("k", 101)?),
                other => return Err(Error::argument(format!("unknown k_policy '{other}'"))),
            };
            run_corruption_curve(&CorruptionCurveSpec {
                n: s.get("n", 1000)?,
                d: s.get("d", 50)?,
                levels: s.get_list("levels", &[0, 1, 50])?,
                replications: s.get("replications", 20)?,
                base_seed: s.get("base_seed", 0)?,
                t_star_scale: s.get("t_star_scale", 200.0)?,
                noise_sd: s.get("noise_sd", 1.0)?,
                x_scale: parse_x_scale(&s.get::<String>("x_scale", "sd5".into())?)?,
                k_policy,
                eps: s.get("eps", 1e-7)?,
                erm_max_iter: s.get("erm_max_iter", 2500)?,
                mom_max_iter: s.get("mom_max_iter", 700)?,
                test_n: s.get("test_n", 10_000)?,
            })
        }
        ExperimentName::BlockStrategyCompare => run_block_strategy_compare(&BlockCompareSpec {
            n: s.get("n", 1000)?,
            d: s.get("d", 100)?,
            k: s.get("k", 10)?,
            replications: s.get("replications", 20)?,
            base_seed: s.get("base_seed", 0)?,
            t_star_scale: s.get("t_star_scale", 3.0)?,
            noise_sd: s.get("noise_sd", 1.0)?,
            eps: s.get("eps", 1e-6)?,
            max_iter: s.get("max_iter", 2000)?,
        }),
        ExperimentName::Timing => run_timing(&TimingSpec {
            n: s.get("n", 10_000)?,
            d: s.get("d", 100)?,
            k_values: s.get_list("k_values", &[10, 50])?,
            iterations: s.get("iterations", 50)?,
            replications: s.get("replications", 5)?,
            base_seed: s.get("base_seed", 0)?,
            t_star_scale: s.get("t_star_scale", 3.0)?,
            noise_sd: s.get("noise_sd", 1.0)?,
        }),
        ExperimentName::Prop1 => {
            let d = s.get("d", 10)?;
            run_prop1(&Prop1Spec {
                n: s.get("n", 200)?,
                d,
                v_scale: s.get("v_scale", 10.0)?,
                replications: s.get("replications", 100)?,
                base_seed: s.get("base_seed", 0)?,
                t_star_scale: s.get("t_star_scale", 20.0)?,
                k: s.get("k", Prop1Spec::default_k(d))?,
                erm_max_iter: s.get("erm_max_iter", 4000)?,
                mom_max_iter: s.get("mom_max_iter", 1200)?,
                eps: s.get("eps", 1e-10)?,
            })
        }
        ExperimentName::Prop2 => {
            let x_level = s.get("x_level", 10.0)?;
            run_prop2(&Prop2Spec {
                n: s.get("n", 8000)?,
                x_level,
                t_star: s.get("t_star", 0.3)?,
                replications: s.get("replications", 2000)?,
                base_seed: s.get("base_seed", 0)?,
                k: s.get("k", x_level.round() as usize)?,
                mom_step: s.get("mom_step", 0.005)?,
                mom_max_iter: s.get("mom_max_iter", 1200)?,
                eps: s.get("eps", 1e-9)?,
            })
        }
        ExperimentName::ComplexityCheck => run_complexity_check(&ComplexityCheckSpec::standard(
            s.get("gamma", 0.5)?,
            s.get("n_mc", 2000)?,
            s.get("base_seed", 0)?,
        )),
        ExperimentName::OutlierDetect => run_outlier_detect(&OutlierDetectSpec {
            n: s.get("n", 100)?,
            d: s.get("d", 10)?,
            k: s.get("k", 10)?,
            planted: s.get_list("planted", &[42, 62, 66])?,
            x_value: s.get("x_value", 10.0)?,
            iterations: s.get("iterations", 5000)?,
            burn_in: s.get("burn_in", 1000)?,
            replications: s.get("replications", 20)?,
            base_seed: s.get("base_seed", 0)?,
            t_star_scale: s.get("t_star_scale", 3.0)?,
            noise_sd: s.get("noise_sd", 1.0)?,
        }),
    }
}

fn parse_x_scale(s: &str) -> Result<OutlierXScale, Error> {
    match s {
        "sd5" => Ok(OutlierXScale::StdDev5),
        "var5" => Ok(OutlierXScale::Var5),
        other => Err(Error::argument(format!("unknown x_scale '{other}'"))),
    }
}
