//! Curves, summary tables and the rank-test comparison.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::{format_p, friedman, nemenyi, FriedmanResult, NemenyiResult, ScoreMatrix};

use super::io::{csv_err, io_err};

pub const BINS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinStat {
    pub mean: f64,
    pub mean_sigma: f64,
    pub max: f64,
    pub max_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSummary {
    pub bins: Vec<BinStat>,
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt())
}

/// Bin `b` of a run with `n` samples covers indices `[b·n/bins, (b+1)·n/bins)`.
fn bin_edges(n: usize, bins: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..bins).map(move |b| (b * n / bins, (b + 1) * n / bins))
}

/// Per-bin mean objective and running max, then mean and population σ of
/// both across runs.
pub fn aggregate_generations(runs: &[Vec<f64>], bins: usize) -> Result<GenerationSummary> {
    if runs.is_empty() || bins == 0 {
        return Err(Error::Config("aggregate_generations needs at least one run and one bin".into()));
    }
    if let Some(short) = runs.iter().find(|r| r.len() < bins) {
        return Err(Error::TooFewSamples { samples: short.len(), bins });
    }
    let per_run: Vec<(Vec<f64>, Vec<f64>)> = runs
        .iter()
        .map(|r| {
            let mut best = f64::NEG_INFINITY;
            bin_edges(r.len(), bins)
                .map(|(lo, hi)| {
                    let s = &r[lo..hi];
                    best = s.iter().copied().fold(best, f64::max);
                    (s.iter().sum::<f64>() / s.len() as f64, best)
                })
                .unzip()
        })
        .collect();
    let bins = (0..bins)
        .map(|b| {
            let means: Vec<f64> = per_run.iter().map(|(m, _)| m[b]).collect();
            let maxes: Vec<f64> = per_run.iter().map(|(_, x)| x[b]).collect();
            let (mean, mean_sigma) = mean_std(&means);
            let (max, max_sigma) = mean_std(&maxes);
            BinStat {
                mean,
                mean_sigma,
                max,
                max_sigma,
            }
        })
        .collect();
    Ok(GenerationSummary { bins })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algo: String,
    pub avg_max: f64,
    pub final_sigma: f64,
    pub max_reward: f64,
    pub avg_reward: f64,
}

/// Avg Max and Final σ over the best of each run; Max and Avg reward over
/// the pooled last-bin objectives.
pub fn summary_row(algo: &str, runs: &[Vec<f64>], bins: usize) -> Result<SummaryRow> {
    if runs.is_empty() {
        return Err(Error::Config(format!("{algo}: no runs to summarize")));
    }
    let bests: Vec<f64> = runs.iter().map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
    let (avg_max, final_sigma) = mean_std(&bests);
    let mut last = Vec::new();
    for r in runs {
        if r.len() < bins {
            return Err(Error::TooFewSamples { samples: r.len(), bins });
        }
        last.extend_from_slice(&r[(bins - 1) * r.len() / bins..]);
    }
    Ok(SummaryRow {
        algo: algo.to_string(),
        avg_max,
        final_sigma,
        max_reward: last.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        avg_reward: last.iter().sum::<f64>() / last.len() as f64,
    })
}

/// Left-aligned first column, right-aligned rest.
pub fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { format!("{c:<w$}", w = width[i]) } else { format!("{c:>w$}", w = width[i]) })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, header);
    let _ = writeln!(out, "{}", "-".repeat(width.iter().sum::<usize>() + 2 * (width.len() - 1)));
    for r in rows {
        line(&mut out, r);
    }
    out
}

pub const SUMMARY_HEADER: [&str; 5] = ["algo", "avg_max", "final_sigma", "max_reward", "avg_reward"];

pub fn summary_text(rows: &[SummaryRow]) -> String {
    let header = ["Algorithm", "Avg Max", "Final σ", "Max reward", "Avg reward"].map(String::from);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.algo.clone(),
                format!("{:.3}", r.avg_max),
                format!("{:.3}", r.final_sigma),
                format!("{:.3}", r.max_reward),
                format!("{:.3}", r.avg_reward),
            ]
        })
        .collect();
    aligned(&header, &body)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scores: ScoreMatrix,
    pub friedman: FriedmanResult,
    pub nemenyi: NemenyiResult,
    pub alpha: f64,
    /// Pairs whose Nemenyi p-value is below `alpha`.
    pub flagged: Vec<(String, String, f64)>,
}

pub fn compare_scores(scores: ScoreMatrix, alpha: f64) -> Result<Comparison> {
    let friedman = friedman(&scores)?;
    let nemenyi = nemenyi(&scores)?;
    let mut flagged = Vec::new();
    for i in 0..scores.k() {
        for j in i + 1..scores.k() {
            if nemenyi.p[i][j] < alpha {
                flagged.push((scores.labels[i].clone(), scores.labels[j].clone(), nemenyi.p[i][j]));
            }
        }
    }
    Ok(Comparison {
        scores,
        friedman,
        nemenyi,
        alpha,
        flagged,
    })
}

impl Comparison {
    pub fn friedman_text(&self) -> String {
        let header = ["Algorithm", "Avg rank"].map(String::from);
        let rows: Vec<Vec<String>> = self
            .scores
            .labels
            .iter()
            .zip(&self.friedman.avg_ranks)
            .map(|(l, r)| vec![l.clone(), format!("{r:.2}")])
            .collect();
        format!(
            "{}chi2 = {:.3}, df = {}, p = {}\n",
            aligned(&header, &rows),
            self.friedman.statistic,
            self.scores.k() - 1,
            format_p(self.friedman.p_value)
        )
    }

    /// Nemenyi p-matrix with `*` on pairs below alpha.
    pub fn nemenyi_text(&self) -> String {
        let mut header = vec![String::new()];
        header.extend(self.scores.labels.iter().cloned());
        let rows: Vec<Vec<String>> = self
            .scores
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let mut r = vec![l.clone()];
                r.extend(self.nemenyi.p[i].iter().enumerate().map(|(j, &p)| {
                    let mark = if i != j && p < self.alpha { "*" } else { " " };
                    format!("{}{mark}", format_p(p))
                }));
                r
            })
            .collect();
        format!("{}* p < {}\n", aligned(&header, &rows), self.alpha)
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        let labels = &self.scores.labels;
        write_csv(&out.join("scores.csv"), labels, self.scores.rows.iter().map(|r| r.iter().map(f64::to_string).collect()))?;

        let header = ["algo", "avg_rank", "statistic", "p_value"].map(String::from);
        let rows = labels.iter().zip(&self.friedman.avg_ranks).map(|(l, r)| {
            vec![l.clone(), r.to_string(), self.friedman.statistic.to_string(), self.friedman.p_value.to_string()]
        });
        write_csv(&out.join("friedman.csv"), &header, rows)?;

        let mut header = vec!["algo".to_string()];
        header.extend(labels.iter().cloned());
        let rows = labels.iter().zip(&self.nemenyi.p).map(|(l, row)| {
            let mut r = vec![l.clone()];
            r.extend(row.iter().map(f64::to_string));
            r
        });
        write_csv(&out.join("nemenyi.csv"), &header, rows)?;

        write_text(&out.join("friedman.txt"), &self.friedman_text())?;
        write_text(&out.join("nemenyi.txt"), &self.nemenyi_text())
    }
}

pub(crate) fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(&r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_summary(out: &Path, rows: &[SummaryRow]) -> Result<()> {
    let header = SUMMARY_HEADER.map(String::from);
    let body = rows.iter().map(|r| {
        vec![
            r.algo.clone(),
            r.avg_max.to_string(),
            r.final_sigma.to_string(),
            r.max_reward.to_string(),
            r.avg_reward.to_string(),
        ]
    });
    write_csv(&out.join("summary.csv"), &header, body)?;
    write_text(&out.join("summary.txt"), &summary_text(rows))
}

pub fn write_curves(out: &Path, curves: &[(String, GenerationSummary)]) -> Result<()> {
    let header = ["algo", "bin", "mean", "mean_sigma", "max", "max_sigma"].map(String::from);
    let rows = curves.iter().flat_map(|(algo, g)| {
        g.bins.iter().enumerate().map(move |(b, s)| {
            vec![
                algo.clone(),
                b.to_string(),
                s.mean.to_string(),
                s.mean_sigma.to_string(),
                s.max.to_string(),
                s.max_sigma.to_string(),
            ]
        })
    });
    write_csv(&out.join("curves.csv"), &header, rows)
}
