//! Friedman omnibus test and Nemenyi post-hoc comparisons.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// N experiments (rows) by k algorithms (columns) of best scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = ScoreMatrix { labels, rows };
        m.validate()?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() < 2 || self.k() < 2 {
            return Err(Error::Stats(format!("need at least 2 rows and 2 columns, got {}x{}", self.n(), self.k())));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != self.k() {
                return Err(Error::Stats(format!("row {i} has {} entries, expected {}", r.len(), self.k())));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Stats(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(())
    }

    /// Reads the score CSV: header of labels, one row per seed.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let labels: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Stats(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Stats(e.to_string()))?;
            let row = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Stats(format!("'{s}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        ScoreMatrix::new(labels, rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub avg_ranks: Vec<f64>,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NemenyiResult {
    pub p: Vec<Vec<f64>>,
}

/// Ranks within one row, 1 = highest, ties share their average rank.
pub fn rank_row(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
    let mut ranks = vec![0.0; row.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && row[order[j + 1]] == row[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn average_ranks(m: &ScoreMatrix) -> Vec<f64> {
    let mut sums = vec![0.0; m.k()];
    for row in &m.rows {
        for (s, r) in sums.iter_mut().zip(rank_row(row)) {
            *s += r;
        }
    }
    sums.iter().map(|s| s / m.n() as f64).collect()
}

pub fn friedman(m: &ScoreMatrix) -> Result<FriedmanResult> {
    m.validate()?;
    let (n, k) = (m.n() as f64, m.k() as f64);
    let avg_ranks = average_ranks(m);
    let sum_sq: f64 = avg_ranks.iter().map(|r| (r * n).powi(2)).sum();
    let statistic = (12.0 / (n * k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0)).max(0.0);
    let chi = ChiSquared::new(k - 1.0).map_err(|e| Error::Stats(e.to_string()))?;
    let p_value = chi.sf(statistic).clamp(0.0, 1.0);
    Ok(FriedmanResult {
        avg_ranks,
        statistic,
        p_value,
    })
}

pub fn nemenyi(m: &ScoreMatrix) -> Result<NemenyiResult> {
    m.validate()?;
    let k = m.k();
    let r = average_ranks(m);
    let se = ((k * (k + 1)) as f64 / (6.0 * m.n() as f64)).sqrt();
    let mut p = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let z = (r[i] - r[j]).abs() / se;
            let v = studentized_range_sf(z * std::f64::consts::SQRT_2, k);
            p[i][j] = v;
            p[j][i] = v;
        }
    }
    Ok(NemenyiResult { p })
}

/// Upper tail of the studentized range with `k` groups and infinite degrees
/// of freedom, by composite Simpson on [-8, 8].
pub fn studentized_range_sf(q: f64, k: usize) -> f64 {
    if q <= 0.0 {
        return 1.0;
    }
    let nd = Normal::standard();
    let f = |z: f64| {
        let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        phi * (nd.cdf(z) - nd.cdf(z - q)).powi(k as i32 - 1)
    };
    let (a, b, steps) = (-8.0, 8.0, 16_000);
    let h = (b - a) / steps as f64;
    let mut s = f(a) + f(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    let cdf = k as f64 * s * h / 3.0;
    (1.0 - cdf).clamp(0.0, 1.0)
}

/// Three decimals; anything below 5e-4 prints as 0.000.
pub fn format_p(p: f64) -> String {
    if p < 5e-4 {
        "0.000".to_string()
    } else {
        format!("{p:.3}")
    }
}
