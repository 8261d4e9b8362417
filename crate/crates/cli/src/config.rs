//! Flat `section.key = value` configuration files.
//!
//! Config values are defaults: an explicit command-line flag always wins.
//! Keys are checked against the known flag names per subcommand so typos are
//! rejected rather than silently ignored.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use minmax_mom::data::read_kv_file;
use minmax_mom::error::Error;

const SOLVER_KEYS: &[&str] = &[
    "k",
    "blocks",
    "median_criterion",
    "step_rule",
    "step",
    "step_denominator",
    "eps",
    "max_iter",
    "seed",
];
const LOSS_KEYS: &[&str] = &["loss", "delta", "tau"];

fn section_keys(section: &str) -> Option<Vec<&'static str>> {
    let mut keys: Vec<&'static str> = match section {
        "fit" => vec!["data", "out"],
        "cv" => vec!["data", "k_grid", "v_folds", "out"],
        "lepski" => {
            let mut v = vec!["data", "k_grid", "thresholds", "candidates", "out"];
            v.extend(LOSS_KEYS);
            return Some(v);
        }
        "experiment" => return Some(vec!["spec", "out_dir"]),
        "bernstein" => {
            let mut v = vec![
                "design",
                "d",
                "t_star",
                "t_star_fill",
                "noise",
                "noise_sd",
                "noise_lo",
                "noise_hi",
                "r",
                "n_dirs",
                "n_x",
                "seed",
                "c_prime",
                "moment_eps",
                "out",
            ];
            v.extend(LOSS_KEYS);
            return Some(v);
        }
        "complexity" => {
            return Some(vec![
                "data",
                "sigma",
                "gamma",
                "a_const",
                "lipschitz",
                "n_mc",
                "seed",
                "out",
            ])
        }
        "detect-outliers" => vec!["data", "iterations", "burn_in", "out"],
        "generate" => {
            return Some(vec![
                "model",
                "n",
                "d",
                "seed",
                "t_star",
                "t_star_fill",
                "noise_sd",
                "n_out",
                "x_scale",
                "v_scale",
                "x_level",
                "out",
                "meta",
            ])
        }
        _ => return None,
    };
    keys.extend(LOSS_KEYS);
    keys.extend(SOLVER_KEYS);
    Some(keys)
}

/// Loads and validates a config file; an absent path yields an empty map.
pub fn load(path: Option<&Path>) -> Result<BTreeMap<String, String>, Error> {
    let Some(path) = path else {
        return Ok(BTreeMap::new());
    };
    let map = read_kv_file(path).map_err(|e| match e {
        Error::Io(io) => Error::argument(format!("cannot read '{}': {io}", path.display())),
        other => other,
    })?;
    for key in map.keys() {
        let Some((section, name)) = key.split_once('.') else {
            return Err(Error::argument(format!(
                "config key '{key}' is not of the form section.key"
            )));
        };
        let Some(known) = section_keys(section) else {
            return Err(Error::argument(format!(
                "unknown config section '{section}'"
            )));
        };
        if !known.contains(&name) {
            return Err(Error::argument(format!("unknown config key '{key}'")));
        }
    }
    Ok(map)
}

/// Looks up config defaults for one subcommand section.
pub struct Resolver<'a> {
    map: &'a BTreeMap<String, String>,
    section: &'static str,
}

impl<'a> Resolver<'a> {
    pub fn new(map: &'a BTreeMap<String, String>, section: &'static str) -> Self {
        Resolver { map, section }
    }

    pub fn has(&self, name: &str) -> bool {
        self.map.contains_key(&format!("{}.{name}", self.section))
    }

    fn lookup<T: FromStr>(&self, name: &str) -> Result<Option<T>, Error> {
        match self.map.get(&format!("{}.{name}", self.section)) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::argument(format!(
                    "config value '{raw}' for {}.{name} does not parse",
                    self.section
                ))
            }),
        }
    }

    /// Flag value, else config value, else `None`.
    pub fn optional<T: FromStr>(&self, flag: Option<T>, name: &str) -> Result<Option<T>, Error> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.lookup(name),
        }
    }

    /// Flag value, else config value, else the default.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, name: &str, default: T) -> Result<T, Error> {
        Ok(self.optional(flag, name)?.unwrap_or(default))
    }

    /// Flag value, else config value, else an error naming the flag.
    pub fn required<T: FromStr>(
        &self,
        flag: Option<T>,
        name: &str,
        flag_name: &str,
    ) -> Result<T, Error> {
        self.optional(flag, name)?
            .ok_or_else(|| Error::argument(format!("missing required {flag_name}")))
    }
}
