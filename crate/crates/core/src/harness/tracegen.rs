use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use crate::model::{FaceCode, PlateCode};
use crate::synthscene::{gen_trace, write_trace, TraceParams};

use super::config::ScenarioConfig;
use super::HarnessError;

/// Arguments of the trace generation command.
#[derive(Debug, Clone)]
pub struct TraceCmd {
    pub steps: usize,
    pub seed: u64,
    /// One plate code per line.
    pub plates: Option<PathBuf>,
    /// One face code (0..4096) per line.
    pub faces: Option<PathBuf>,
    pub repeat_prob: f64,
    pub out: PathBuf,
    pub vehicle_id: u64,
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, HarnessError> {
    let f = File::open(path).map_err(|e| HarnessError::BadArgs(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| HarnessError::BadArgs(format!("{}: {e}", path.display())))?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push((i + 1, t.to_string()));
        }
    }
    Ok(out)
}

fn parse_pool<T: std::str::FromStr>(path: &Path) -> Result<Vec<T>, HarnessError> {
    read_lines(path)?
        .into_iter()
        .map(|(n, s)| s.parse().map_err(|_| HarnessError::BadArgs(format!("{}:{n}: bad value {s:?}", path.display()))))
        .collect()
}

/// Writes a generated `vctrace/1` file. Missing pools are drawn at random
/// from the seed.
pub fn gen_trace_cmd(args: &TraceCmd) -> Result<(), HarnessError> {
    if args.steps == 0 {
        return Err(HarnessError::BadArgs("--steps must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&args.repeat_prob) {
        return Err(HarnessError::BadArgs("--repeat-prob must be within [0, 1]".into()));
    }
    let defaults = ScenarioConfig {
        seed: args.seed,
        ..Default::default()
    }
    .pools();
    let plates: Vec<PlateCode> = match &args.plates {
        Some(p) => parse_pool(p)?,
        None => defaults.0,
    };
    let faces: Vec<FaceCode> = match &args.faces {
        Some(p) => parse_pool::<u16>(p)?
            .into_iter()
            .map(|c| FaceCode::new(c).map_err(|e| HarnessError::BadArgs(e.to_string())))
            .collect::<Result<_, _>>()?,
        None => defaults.1,
    };
    let mut p = TraceParams::new(args.seed, args.steps, plates, faces);
    p.repeat_prob = args.repeat_prob;
    p.vehicle_id = args.vehicle_id;
    let trace = gen_trace(&p).map_err(|e| HarnessError::BadArgs(e.to_string()))?;
    let f = File::create(&args.out).map_err(|e| HarnessError::BadArgs(format!("{}: {e}", args.out.display())))?;
    write_trace(&trace, BufWriter::new(f))?;
    Ok(())
}
