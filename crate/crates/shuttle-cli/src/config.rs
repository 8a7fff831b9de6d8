//! Flat `key = value` configuration files with `#` comments.
//!
//! Every physical quantity carries an explicit unit that is resolved while
//! parsing, so the in-memory [`RunConfig`] is entirely in SI units:
//!
//! * masses: `Cs` (caesium-133), `<x> amu`, or `<x> kg`
//! * lengths: `<x> m`, `<x> nm`, `<x> um`, and for `distance` also
//!   `<x> lambda` (units of the lattice wavelength)
//! * energies: `<x> J` or `<x> ER` (photon-recoil energies)
//! * times: `<x> s`, `<x> ms`, `<x> us`, or `<x> T0` (trap periods);
//!   a bare `0` is accepted where a vanishing time is meaningful
//!
//! The transport-time grid is one of
//! `T_grid = log <min> <max> <count>` (logarithmic, in trap periods),
//! `T_grid = list <v1> <v2> ...` (explicit, in trap periods), or
//! `T_grid = seconds <v1> <v2> ...` (explicit, in seconds).
//!
//! Unknown keys, duplicate keys, and malformed values are reported with
//! their line number. Keys that no subcommand strictly needs (for example
//! `output_csv` for `extrema`) may still appear; they are validated but
//! only consumed where relevant.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use shuttle_core::constants::{ATOMIC_MASS_UNIT, CS133_MASS};
use shuttle_core::lattice::{derive_params, recoil_energy, DerivedParams, LatticeConfig};
use shuttle_core::noise::NoiseChannel;
use shuttle_core::{Error, Result};

/// Keys recognised by the parser, used for the unknown-key diagnostic.
const KNOWN_KEYS: &[&str] = &[
    "mass",
    "lambda_L",
    "depth",
    "distance",
    "mode_n",
    "channels",
    "noise_strength_D",
    "tau_list",
    "T_grid",
    "mc_paths",
    "mc_seed",
    "mc_grid_per_period",
    "lambda_grid",
    "verify_T",
    "verify_tau",
    "verify_paths",
    "output_csv",
    "output_record",
];

/// A fully resolved run configuration; all quantities are SI.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Lattice parameters (mass, wavelength, depth, transport distance).
    pub lattice: LatticeConfig,
    /// Quantities derived from [`RunConfig::lattice`].
    pub derived: DerivedParams,
    /// Noise channels to sweep, in the order they were listed.
    pub channels: Vec<NoiseChannel>,
    /// Noise intensity `D` in seconds (the fluctuation is dimensionless).
    pub strength: f64,
    /// Correlation times in seconds; `0` selects the white-noise limit.
    pub taus: Vec<f64>,
    /// Transport times in seconds.
    pub t_grid: Vec<f64>,
    /// Oscillator level whose sensitivity is reported.
    pub mode: u32,
    /// Monte-Carlo paths per sweep row; `0` disables the cross-check.
    pub mc_paths: usize,
    /// Base seed for all stochastic estimates; required when they run.
    pub mc_seed: Option<u64>,
    /// Time-grid density for sampled noise paths, points per trap period.
    pub mc_grid_per_period: f64,
    /// Relative noise amplitudes for the quadratic-scaling check.
    pub lambda_grid: Vec<f64>,
    /// Transport time used by `verify`, seconds.
    pub verify_t: f64,
    /// Correlation time used by `verify`, seconds (must be positive).
    pub verify_tau: f64,
    /// Paths per amplitude for the quadratic-scaling check.
    pub verify_paths: usize,
    /// Destination for the sweep CSV (required by `run`).
    pub output_csv: Option<PathBuf>,
    /// Destination for the JSON run record (required by `run`).
    pub output_record: Option<PathBuf>,
}

impl RunConfig {
    /// Reads and parses a configuration file, returning the resolved
    /// configuration together with the raw text (which run records keep
    /// verbatim so a sweep can be replayed from its record alone).
    pub fn from_path(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg = Self::from_text(&text)?;
        Ok((cfg, text))
    }

    /// Parses configuration text.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries = Entries::parse(text)?;

        let mass = entries.require("mass").and_then(|(l, v)| mass_kg(l, &v))?;
        let wavelength = entries
            .require("lambda_L")
            .and_then(|(l, v)| length_m(l, &v, None))?;
        let e_r = recoil_energy(mass, wavelength);
        let depth = entries
            .require("depth")
            .and_then(|(l, v)| energy_j(l, &v, e_r))?;
        let distance = match entries.take("distance") {
            Some((l, v)) => length_m(l, &v, Some(wavelength))?,
            None => 0.5 * wavelength,
        };
        let lattice = LatticeConfig::new(mass, wavelength, depth)?.with_distance(distance)?;
        let derived = derive_params(&lattice)?;
        let period = derived.period;

        let channels = entries
            .require("channels")
            .and_then(|(l, v)| channel_list(l, &v))?;
        let strength = entries
            .require("noise_strength_D")
            .and_then(|(l, v)| time_s(l, &v, period))?;
        if !(strength > 0.0) {
            return Err(Error::InvalidConfig(
                "noise_strength_D must be positive".into(),
            ));
        }
        let taus = {
            let (l, v) = entries.require("tau_list")?;
            let mut taus = Vec::new();
            for item in comma_list(&v) {
                let tau = time_s(l, item, period)?;
                if tau < 0.0 {
                    return Err(Error::parse(l, "correlation times must be >= 0"));
                }
                taus.push(tau);
            }
            if taus.is_empty() {
                return Err(Error::parse(l, "tau_list must name at least one value"));
            }
            taus
        };
        let t_grid = {
            let (l, v) = entries.require("T_grid")?;
            t_grid_s(l, &v, period)?
        };

        let mode = match entries.take("mode_n") {
            Some((l, v)) => int_u32(l, &v)?,
            None => 0,
        };
        let mc_paths = match entries.take("mc_paths") {
            Some((l, v)) => int_usize(l, &v)?,
            None => 0,
        };
        let mc_seed = match entries.take("mc_seed") {
            Some((l, v)) => Some(int_u64(l, &v)?),
            None => None,
        };
        if mc_paths > 0 && mc_seed.is_none() {
            return Err(Error::InvalidConfig(
                "mc_seed is required whenever mc_paths > 0".into(),
            ));
        }
        if mc_paths > 0 && mc_paths < 100 {
            return Err(Error::InvalidConfig(format!(
                "mc_paths must be 0 (disabled) or at least 100, got {mc_paths}"
            )));
        }
        let mc_grid_per_period = match entries.take("mc_grid_per_period") {
            Some((l, v)) => {
                let g = num(l, &v)?;
                if !(g > 0.0) {
                    return Err(Error::parse(l, "mc_grid_per_period must be positive"));
                }
                g
            }
            None => 1000.0,
        };
        let lambda_grid = match entries.take("lambda_grid") {
            Some((l, v)) => {
                let vals: Vec<f64> = comma_list(&v)
                    .into_iter()
                    .map(|item| num(l, item))
                    .collect::<Result<_>>()?;
                if vals.is_empty() {
                    return Err(Error::parse(l, "lambda_grid must name at least one value"));
                }
                vals
            }
            None => vec![1e-4, 1e-3, 1e-2],
        };
        let verify_t = match entries.take("verify_T") {
            Some((l, v)) => time_s(l, &v, period)?,
            None => 3.0 * period,
        };
        let verify_tau = match entries.take("verify_tau") {
            Some((l, v)) => time_s(l, &v, period)?,
            None => period,
        };
        if !(verify_t > 0.0) || !(verify_tau > 0.0) {
            return Err(Error::InvalidConfig(
                "verify_T and verify_tau must be positive".into(),
            ));
        }
        let verify_paths = match entries.take("verify_paths") {
            Some((l, v)) => int_usize(l, &v)?,
            None => mc_paths,
        };
        let output_csv = entries.take("output_csv").map(|(_, v)| PathBuf::from(v));
        let output_record = entries.take("output_record").map(|(_, v)| PathBuf::from(v));

        entries.finish()?;

        Ok(RunConfig {
            lattice,
            derived,
            channels,
            strength,
            taus,
            t_grid,
            mode,
            mc_paths,
            mc_seed,
            mc_grid_per_period,
            lambda_grid,
            verify_t,
            verify_tau,
            verify_paths,
            output_csv,
            output_record,
        })
    }

    /// Emits an equivalent configuration entirely in SI units.
    ///
    /// Numbers are printed with 17 significant digits, so parsing the
    /// canonical text reproduces this configuration bit for bit.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mass = {:.17e} kg", self.lattice.mass);
        let _ = writeln!(s, "lambda_L = {:.17e} m", self.lattice.lattice_wavelength);
        let _ = writeln!(s, "depth = {:.17e} J", self.lattice.depth);
        let _ = writeln!(s, "distance = {:.17e} m", self.lattice.distance);
        let names: Vec<&str> = self.channels.iter().map(|c| c.name()).collect();
        let _ = writeln!(s, "channels = {}", names.join(", "));
        let _ = writeln!(s, "noise_strength_D = {:.17e} s", self.strength);
        let taus: Vec<String> = self
            .taus
            .iter()
            .map(|t| format!("{t:.17e} s"))
            .collect();
        let _ = writeln!(s, "tau_list = {}", taus.join(", "));
        let ts: Vec<String> = self.t_grid.iter().map(|t| format!("{t:.17e}")).collect();
        let _ = writeln!(s, "T_grid = seconds {}", ts.join(" "));
        let _ = writeln!(s, "mode_n = {}", self.mode);
        let _ = writeln!(s, "mc_paths = {}", self.mc_paths);
        if let Some(seed) = self.mc_seed {
            let _ = writeln!(s, "mc_seed = {seed}");
        }
        let _ = writeln!(s, "mc_grid_per_period = {:.17e}", self.mc_grid_per_period);
        let ls: Vec<String> = self
            .lambda_grid
            .iter()
            .map(|l| format!("{l:.17e}"))
            .collect();
        let _ = writeln!(s, "lambda_grid = {}", ls.join(", "));
        let _ = writeln!(s, "verify_T = {:.17e} s", self.verify_t);
        let _ = writeln!(s, "verify_tau = {:.17e} s", self.verify_tau);
        let _ = writeln!(s, "verify_paths = {}", self.verify_paths);
        if let Some(p) = &self.output_csv {
            let _ = writeln!(s, "output_csv = {}", p.display());
        }
        if let Some(p) = &self.output_record {
            let _ = writeln!(s, "output_record = {}", p.display());
        }
        s
    }
}

/// Key/value pairs with their line numbers, consumed field by field so
/// leftovers can be reported as unknown keys.
struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(
                    line_no,
                    format!("expected `key = value`, got {line:?}"),
                ));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::parse(line_no, "empty key before `=`"));
            }
            if value.is_empty() {
                return Err(Error::parse(line_no, format!("key `{key}` has no value")));
            }
            if map
                .insert(key.to_string(), (line_no, value.to_string()))
                .is_some()
            {
                return Err(Error::parse(line_no, format!("duplicate key `{key}`")));
            }
        }
        Ok(Entries { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key)
            .ok_or_else(|| Error::InvalidConfig(format!("missing required key `{key}`")))
    }

    fn finish(self) -> Result<()> {
        if let Some((key, (line, _))) = self.map.into_iter().next() {
            let hint = if KNOWN_KEYS.contains(&key.as_str()) {
                " (not consumed)"
            } else {
                ""
            };
            return Err(Error::parse(line, format!("unknown key `{key}`{hint}")));
        }
        Ok(())
    }
}

fn num(line: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(line, format!("expected a number, got {s:?}")))
}

fn int_u64(line: usize, s: &str) -> Result<u64> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| Error::parse(line, format!("expected a non-negative integer, got {s:?}")))
}

fn int_usize(line: usize, s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::parse(line, format!("expected a non-negative integer, got {s:?}")))
}

fn int_u32(line: usize, s: &str) -> Result<u32> {
    s.trim()
        .parse::<u32>()
        .map_err(|_| Error::parse(line, format!("expected a non-negative integer, got {s:?}")))
}

/// Splits `"<value> <unit>"`; a single token comes back with no unit.
fn split_unit(line: usize, s: &str) -> Result<(String, Option<String>)> {
    let tokens: Vec<&str> = s.split_whitespace().collect();
    match tokens.as_slice() {
        [v] => Ok((v.to_string(), None)),
        [v, u] => Ok((v.to_string(), Some(u.to_string()))),
        _ => Err(Error::parse(
            line,
            format!("expected `<value> <unit>`, got {s:?}"),
        )),
    }
}

fn mass_kg(line: usize, s: &str) -> Result<f64> {
    if s.trim() == "Cs" {
        return Ok(CS133_MASS);
    }
    let (value, unit) = split_unit(line, s)?;
    let v = num(line, &value)?;
    match unit.as_deref() {
        Some("kg") => Ok(v),
        Some("amu") => Ok(v * ATOMIC_MASS_UNIT),
        _ => Err(Error::parse(
            line,
            format!("mass must be `Cs`, `<x> amu`, or `<x> kg`, got {s:?}"),
        )),
    }
}

fn length_m(line: usize, s: &str, wavelength: Option<f64>) -> Result<f64> {
    let (value, unit) = split_unit(line, s)?;
    let v = num(line, &value)?;
    match unit.as_deref() {
        Some("m") => Ok(v),
        Some("nm") => Ok(v * 1e-9),
        Some("um") => Ok(v * 1e-6),
        Some("lambda") => match wavelength {
            Some(w) => Ok(v * w),
            None => Err(Error::parse(
                line,
                "unit `lambda` is only valid for the transport distance",
            )),
        },
        _ => Err(Error::parse(
            line,
            format!("length must carry a unit (m, nm, um, lambda), got {s:?}"),
        )),
    }
}

fn energy_j(line: usize, s: &str, e_r: f64) -> Result<f64> {
    let (value, unit) = split_unit(line, s)?;
    let v = num(line, &value)?;
    match unit.as_deref() {
        Some("J") => Ok(v),
        Some("ER") => Ok(v * e_r),
        _ => Err(Error::parse(
            line,
            format!("energy must carry a unit (J, ER), got {s:?}"),
        )),
    }
}

fn time_s(line: usize, s: &str, period: f64) -> Result<f64> {
    let (value, unit) = split_unit(line, s)?;
    let v = num(line, &value)?;
    match unit.as_deref() {
        Some("s") => Ok(v),
        Some("ms") => Ok(v * 1e-3),
        Some("us") => Ok(v * 1e-6),
        Some("T0") => Ok(v * period),
        None if v == 0.0 => Ok(0.0),
        _ => Err(Error::parse(
            line,
            format!("time must carry a unit (s, ms, us, T0), got {s:?}"),
        )),
    }
}

fn comma_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect()
}

fn channel_list(line: usize, s: &str) -> Result<Vec<NoiseChannel>> {
    let mut channels = Vec::new();
    for item in comma_list(s) {
        let ch = match item {
            "accordion" => NoiseChannel::Accordion,
            "amplitude" => NoiseChannel::Amplitude,
            "position" => NoiseChannel::Position,
            other => {
                return Err(Error::parse(
                    line,
                    format!(
                        "unknown channel `{other}` (expected accordion, amplitude, position)"
                    ),
                ))
            }
        };
        if channels.contains(&ch) {
            return Err(Error::parse(line, format!("channel `{item}` listed twice")));
        }
        channels.push(ch);
    }
    if channels.is_empty() {
        return Err(Error::parse(line, "channels must name at least one channel"));
    }
    Ok(channels)
}

fn t_grid_s(line: usize, s: &str, period: f64) -> Result<Vec<f64>> {
    let tokens: Vec<&str> = s.split_whitespace().collect();
    let grid = match tokens.split_first() {
        Some((&"log", rest)) => {
            let [min, max, count] = rest else {
                return Err(Error::parse(
                    line,
                    "log grid takes exactly `log <min> <max> <count>`",
                ));
            };
            let min = num(line, min)?;
            let max = num(line, max)?;
            let count = int_usize(line, count)?;
            if !(min > 0.0) || !(max > min) {
                return Err(Error::parse(line, "log grid needs 0 < min < max"));
            }
            if count < 2 {
                return Err(Error::parse(line, "log grid needs at least 2 points"));
            }
            let ratio = max / min;
            (0..count)
                .map(|i| min * ratio.powf(i as f64 / (count - 1) as f64) * period)
                .collect()
        }
        Some((&"list", rest)) => rest
            .iter()
            .map(|t| num(line, t).map(|v| v * period))
            .collect::<Result<Vec<f64>>>()?,
        Some((&"seconds", rest)) => rest
            .iter()
            .map(|t| num(line, t))
            .collect::<Result<Vec<f64>>>()?,
        _ => {
            return Err(Error::parse(
                line,
                format!("T_grid must start with `log`, `list`, or `seconds`, got {s:?}"),
            ))
        }
    };
    if grid.is_empty() {
        return Err(Error::parse(line, "T_grid resolved to an empty grid"));
    }
    if grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::parse(line, "transport times must be positive"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        "mass = Cs\n\
         lambda_L = 866 nm\n\
         depth = 850 ER\n\
         channels = accordion\n\
         noise_strength_D = 1e-6 s\n\
         tau_list = 0, 1 T0\n\
         T_grid = list 1 2 3\n"
            .to_string()
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = RunConfig::from_text(&minimal()).unwrap();
        assert_eq!(cfg.mode, 0);
        assert_eq!(cfg.mc_paths, 0);
        assert_eq!(cfg.lambda_grid, vec![1e-4, 1e-3, 1e-2]);
        assert!((cfg.lattice.distance - 0.5 * 866e-9).abs() < 1e-20);
        assert_eq!(cfg.taus[0], 0.0);
        assert!((cfg.taus[1] - cfg.derived.period).abs() < 1e-18);
        assert_eq!(cfg.t_grid.len(), 3);
        assert!((cfg.t_grid[2] - 3.0 * cfg.derived.period).abs() < 1e-15);
    }

    #[test]
    fn unknown_key_reports_line_number() {
        let text = format!("{}bogus_key = 1\n", minimal());
        let err = RunConfig::from_text(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 8"), "{msg}");
        assert!(msg.contains("bogus_key"), "{msg}");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let text = format!("{}mass = Cs\n", minimal());
        let err = RunConfig::from_text(&text).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# header\n\n{}  # trailing\n", minimal());
        RunConfig::from_text(&text).unwrap();
    }

    #[test]
    fn mc_requires_seed_and_enough_paths() {
        let err = RunConfig::from_text(&format!("{}mc_paths = 500\n", minimal()))
            .unwrap_err()
            .to_string();
        assert!(err.contains("mc_seed"), "{err}");
        let err = RunConfig::from_text(&format!("{}mc_paths = 50\nmc_seed = 1\n", minimal()))
            .unwrap_err()
            .to_string();
        assert!(err.contains("at least 100"), "{err}");
    }

    #[test]
    fn canonical_text_round_trips_exactly() {
        let text = format!(
            "{}mc_paths = 200\nmc_seed = 42\noutput_csv = out.csv\noutput_record = out.json\n",
            minimal()
        );
        let cfg = RunConfig::from_text(&text).unwrap();
        let replay = RunConfig::from_text(&cfg.canonical_text()).unwrap();
        assert_eq!(replay.lattice.mass, cfg.lattice.mass);
        assert_eq!(replay.lattice.depth, cfg.lattice.depth);
        assert_eq!(replay.lattice.distance, cfg.lattice.distance);
        assert_eq!(replay.strength, cfg.strength);
        assert_eq!(replay.taus, cfg.taus);
        assert_eq!(replay.t_grid, cfg.t_grid);
        assert_eq!(replay.mc_seed, cfg.mc_seed);
        assert_eq!(replay.lambda_grid, cfg.lambda_grid);
        assert_eq!(replay.verify_t, cfg.verify_t);
        assert_eq!(replay.output_csv, cfg.output_csv);
    }

    #[test]
    fn grid_and_unit_errors_are_reported() {
        for (broken, needle) in [
            ("T_grid = list\n", "empty"),
            ("T_grid = log 1 10\n", "log <min> <max> <count>"),
            ("T_grid = log 10 1 5\n", "min < max"),
            ("noise_strength_D = 1e-6\n", "unit"),
            ("depth = 850\n", "unit"),
            ("channels = sideways\n", "unknown channel"),
        ] {
            let text = minimal()
                .lines()
                .map(|l| {
                    let key = broken.split('=').next().unwrap().trim();
                    if l.starts_with(key) {
                        broken.trim_end().to_string()
                    } else {
                        l.to_string()
                    }
                })
                .collect::<Vec<_>>()
                .join("\n");
            let err = RunConfig::from_text(&text).unwrap_err().to_string();
            assert!(err.contains(needle), "{broken:?} -> {err}");
        }
    }
}
