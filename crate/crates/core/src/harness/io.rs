use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::RunRecord;

use super::config::Algorithm;

pub const RUN_HEADER: [&str; 16] = [
    "run_id", "algo", "seed", "sample_idx", "worker", "objective", "feasible", "l_cy", "f_dh", "f_q", "cb", "bu_max",
    "lcoe", "n_enr", "n_ifba", "vector",
];

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    }
}

pub fn run_id(algo: Algorithm, seed: u64) -> String {
    format!("{algo}-s{seed}")
}

pub fn run_path(out: &Path, algo: Algorithm, seed: u64) -> PathBuf {
    out.join("runs").join(format!("{algo}_seed{seed}.csv"))
}

pub fn encode_vector(x: &[i64]) -> String {
    x.iter().map(i64::to_string).collect::<Vec<_>>().join("-")
}

/// Inverse of [`encode_vector`]; negative entries keep their sign because
/// the separator is only split where a digit precedes it.
pub fn decode_vector(s: &str) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in s.chars() {
        if c == '-' && cur.chars().last().is_some_and(|p| p.is_ascii_digit()) {
            out.push(cur.parse().map_err(|_| Error::Config(format!("bad vector {s:?}")))?);
            cur.clear();
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur.parse().map_err(|_| Error::Config(format!("bad vector {s:?}")))?);
    }
    Ok(out)
}

pub fn write_run(path: &Path, algo: Algorithm, seed: u64, records: &[RunRecord]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(RUN_HEADER).map_err(csv_err(path))?;
    let id = run_id(algo, seed);
    for r in records {
        let mut row = vec![
            id.clone(),
            algo.to_string(),
            seed.to_string(),
            r.sample_idx.to_string(),
            r.worker.to_string(),
            r.objective.to_string(),
            u8::from(r.feasible).to_string(),
        ];
        match &r.foms {
            Some(f) => row.extend([
                f.l_cy.to_string(),
                f.f_dh.to_string(),
                f.f_q.to_string(),
                f.cb.to_string(),
                f.bu_max.to_string(),
                f.lcoe.to_string(),
                f.n_enr.to_string(),
                f.n_ifba.to_string(),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 8)),
        }
        row.push(encode_vector(&r.vector));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// The objective column of a run CSV, checked for contiguous sample indices.
pub fn read_objectives(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let bad = |what: &str| Error::Config(format!("{}: row {i}: bad {what}", path.display()));
        let idx: usize = rec.get(3).and_then(|s| s.parse().ok()).ok_or_else(|| bad("sample_idx"))?;
        if idx != i {
            return Err(bad("sample_idx order"));
        }
        out.push(rec.get(5).and_then(|s| s.parse().ok()).ok_or_else(|| bad("objective"))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_codec() {
        assert_eq!(encode_vector(&[3, 0, 12]), "3-0-12");
        assert_eq!(decode_vector("3-0-12").unwrap(), vec![3, 0, 12]);
        assert_eq!(decode_vector(&encode_vector(&[-4, 2, -10, 0])).unwrap(), vec![-4, 2, -10, 0]);
        assert_eq!(decode_vector("").unwrap(), Vec::<i64>::new());
    }
}
