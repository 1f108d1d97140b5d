//! Figure regeneration: sampling the plotted quantities and writing CSV/SVG.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::soliton::{self, choice_components, derived_fields, DemandSample};
use crate::svg;
use crate::{Error, Result};

/// Quantity plotted by a figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    PriceChoice,
    GoodsChoice,
    CapitalChoice,
    ChoiceValue,
    ChoiceValueSquared,
    NonPriceCompetition,
    Profit,
    ProfitAlt,
}

/// Identity and content of one of the eight figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FigureSpec {
    pub id: u8,
    pub quantity: Quantity,
    pub axes: (&'static str, &'static str),
    pub title: &'static str,
}

impl FigureSpec {
    pub fn new(id: u8) -> Result<Self> {
        use Quantity::*;
        let (quantity, axes, title) = match id {
            1 => (PriceChoice, ("s", "t"), "Price choice component C_h^(1)"),
            2 => (GoodsChoice, ("s", "t"), "Quantitative choice component C_h^(2)"),
            3 => (CapitalChoice, ("s", "t"), "Capital-driven choice C_h^(3)"),
            4 => (ChoiceValue, ("s", "t"), "Choice value |C_h|"),
            5 => (ChoiceValueSquared, ("p", "q"), "(C_h^(1))^2 + (C_h^(2))^2"),
            6 => (NonPriceCompetition, ("S", "t"), "Non-price competition C^(3)"),
            7 => (Profit, ("S", "t"), "Profit component P^(3)"),
            8 => (ProfitAlt, ("S", "t"), "Profit component P^(3), second offset"),
            _ => return Err(Error::invalid("figure", format!("{id} is not in 1..=8"))),
        };
        Ok(Self {
            id,
            quantity,
            axes,
            title,
        })
    }

    pub fn all() -> impl Iterator<Item = FigureSpec> {
        (1..=8).map(|id| Self::new(id).expect("ids 1..=8 are valid"))
    }
}

/// Sampled figure: `values[j * xs.len() + i]` belongs to `(xs[i], ts[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub spec: FigureSpec,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
}

impl FigureData {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.xs.len() + i]
    }

    /// Values along `x` at time index `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.xs.len();
        &self.values[j * n..(j + 1) * n]
    }

    /// Values along `t` at arclength index `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.ts.len()).map(|j| self.at(i, j)).collect()
    }
}

/// Samples a figure's quantity on the configured `(s, t)` grid.
pub fn sample_figure(spec: FigureSpec, cfg: &RunConfig) -> Result<FigureData> {
    cfg.validate()?;
    let p = cfg.params;
    let xs = cfg.s_values();
    let ts = cfg.t_values();
    let eval = |s: f64, t: f64| -> Result<f64> {
        use Quantity::*;
        Ok(match spec.quantity {
            PriceChoice => choice_components(&p, s, t).c1,
            GoodsChoice => choice_components(&p, s, t).c2,
            CapitalChoice => choice_components(&p, s, t).c3,
            ChoiceValue => soliton::choice_magnitude_pq(&p, s, t),
            ChoiceValueSquared => {
                let c = choice_components(&p, s, t);
                c.c1 * c.c1 + c.c2 * c.c2
            }
            NonPriceCompetition => derived_fields(&p, s, t, cfg.x1, cfg.x2)?.c3,
            Profit => derived_fields(&p, s, t, cfg.x1, cfg.x2)?.p3,
            ProfitAlt => derived_fields(&p, s, t, cfg.x1_alt, cfg.x2_alt)?.p3,
        })
    };
    let rows: Vec<Vec<f64>> = ts
        .par_iter()
        .map(|&t| xs.iter().map(|&s| eval(s, t)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    Ok(FigureData {
        spec,
        xs,
        ts,
        values: rows.into_iter().flatten().collect(),
    })
}

/// Formats a float for CSV output (13 significant digits).
pub fn fmt_value(v: f64) -> String {
    format!("{v:.12e}")
}

/// Writes `s,t,value` rows, `t` outer and `s` inner.
pub fn write_csv<W: Write>(data: &FigureData, mut out: W) -> Result<()> {
    writeln!(out, "s,t,value")?;
    for (j, t) in data.ts.iter().enumerate() {
        for (i, s) in data.xs.iter().enumerate() {
            writeln!(out, "{},{},{}", fmt_value(*s), fmt_value(*t), fmt_value(data.at(i, j)))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes `P,Q,ch,R` rows of the demand family.
pub fn write_demand_csv<W: Write>(rows: &[DemandSample], mut out: W) -> Result<()> {
    writeln!(out, "P,Q,ch,R")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_value(r.p),
            fmt_value(r.q),
            fmt_value(r.ch),
            fmt_value(r.radius)
        )?;
    }
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Samples a figure and writes `figure<id>.csv` and/or `figure<id>.svg`
/// into the configured output directory.
pub fn run_figure(spec: FigureSpec, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let data = sample_figure(spec, cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut written = Vec::new();
    if cfg.format.csv() {
        let path = cfg.output_dir.join(format!("figure{}.csv", spec.id));
        write_csv(&data, create(&path)?)?;
        written.push(path);
    }
    if cfg.format.svg() {
        let path = cfg.output_dir.join(format!("figure{}.svg", spec.id));
        let title = format!("Figure {}: {}", spec.id, spec.title);
        svg::write_heatmap(&data.xs, &data.ts, &data.values, spec.axes, &title, create(&path)?)?;
        written.push(path);
    }
    Ok(written)
}

/// Samples the demand-circle family and writes `demand.csv` (plus
/// `demand.svg`, a plot of `R` against `|C_h|`, when SVG is enabled).
pub fn run_demand(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let rows = soliton::demand_curve_family(cfg.demand_a, cfg.demand_max, cfg.demand_max, cfg.demand_n)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut written = Vec::new();
    let path = cfg.output_dir.join("demand.csv");
    write_demand_csv(&rows, create(&path)?)?;
    written.push(path);
    if cfg.format.svg() {
        let mut pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.ch, r.radius)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup();
        let path = cfg.output_dir.join("demand.svg");
        svg::write_polyline(&pts, ("|C_h|", "R"), "Demand-circle radius", create(&path)?)?;
        written.push(path);
    }
    Ok(written)
}

/// Indices of strict interior local maxima of a sampled line.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            n_s: 21,
            n_t: 11,
            ..RunConfig::default()
        }
    }

    #[test]
    fn figure_ids() {
        assert!(FigureSpec::new(0).is_err());
        assert!(FigureSpec::new(9).is_err());
        assert_eq!(FigureSpec::all().count(), 8);
        assert_eq!(FigureSpec::new(5).unwrap().axes, ("p", "q"));
    }

    #[test]
    fn grid_shape_and_origin_value() {
        let d = sample_figure(FigureSpec::new(1).unwrap(), &small()).unwrap();
        assert_eq!(d.values.len(), 21 * 11);
        assert_eq!(d.xs[10], 0.0);
        assert_eq!(d.ts[0], 0.0);
        assert_eq!(d.at(10, 0), 0.0);
    }

    #[test]
    fn figure_five_is_square_of_four() {
        let cfg = small();
        let four = sample_figure(FigureSpec::new(4).unwrap(), &cfg).unwrap();
        let five = sample_figure(FigureSpec::new(5).unwrap(), &cfg).unwrap();
        for (a, b) in four.values.iter().zip(&five.values) {
            assert!((a * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn profit_figures_differ_by_offset() {
        let cfg = small();
        let seven = sample_figure(FigureSpec::new(7).unwrap(), &cfg).unwrap();
        let eight = sample_figure(FigureSpec::new(8).unwrap(), &cfg).unwrap();
        assert_ne!(seven.values, eight.values);
        // p3 carries an explicit factor t
        assert!(seven.row(0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn csv_layout() {
        let cfg = RunConfig {
            n_s: 3,
            n_t: 2,
            ..RunConfig::default()
        };
        let d = sample_figure(FigureSpec::new(3).unwrap(), &cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s,t,value");
        assert_eq!(lines.len(), 1 + 6);
        let first: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(first[..2], [-5.0, 0.0]);
        let fourth: Vec<f64> = lines[4].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fourth[..2], [-5.0, 4.0]);
        let mantissa = lines[2].split(',').nth(2).unwrap().split('e').next().unwrap();
        assert!(mantissa.chars().filter(|c| c.is_ascii_digit()).count() >= 9);
    }

    #[test]
    fn local_maxima_strict_interior() {
        assert_eq!(local_maxima(&[0.0, 1.0, 0.0, 2.0, 2.0, 1.0, 3.0]), vec![1]);
        assert!(local_maxima(&[1.0]).is_empty());
    }
}
