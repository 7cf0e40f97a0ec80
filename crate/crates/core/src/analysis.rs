//! Pareto fronts of GA populations: extraction, summaries, CSV/JSON
//! serialization and SVG scatter plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use moo_core::{nondominated_sort, EvalTag, Generation, Individual};
use serde::{Deserialize, Serialize};

use crate::error::SnnError;

/// Default tolerance (Hz) defining the best-rate subset of a front.
pub const DEFAULT_EPSILON: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSource {
    pub experiment: String,
    pub generation: usize,
    pub gene_names: Vec<String>,
    pub objective_names: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontMetadata {
    pub seeds: Vec<u64>,
    pub config_digest: String,
    /// Seconds since the Unix epoch at export time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    /// Position of the member in its source population.
    pub index: usize,
    pub genes: Vec<f64>,
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub source: FrontSource,
    pub metadata: FrontMetadata,
    pub members: Vec<FrontMember>,
}

impl ParetoFront {
    pub fn n_objectives(&self) -> usize {
        self.source.objective_names.len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Indices of the first non-dominated front, keeping only the first of
/// members with identical objective vectors.
pub fn front_indices<V: AsRef<[f64]>>(objectives: &[V]) -> Vec<usize> {
    if objectives.is_empty() {
        return Vec::new();
    }
    let mut kept: Vec<usize> = Vec::new();
    for i in nondominated_sort(objectives).swap_remove(0) {
        if !kept.iter().any(|&k| objectives[k].as_ref() == objectives[i].as_ref()) {
            kept.push(i);
        }
    }
    kept
}

/// Non-dominated, deduplicated members of `population`.
pub fn extract_front(
    population: &[Individual],
    source: FrontSource,
    metadata: FrontMetadata,
) -> Result<ParetoFront, SnnError> {
    if population.is_empty() {
        return Err(SnnError::EmptyPopulation);
    }
    let objectives: Vec<&[f64]> = population.iter().map(|i| i.objectives.as_slice()).collect();
    let members = front_indices(&objectives)
        .into_iter()
        .map(|i| FrontMember {
            index: i,
            genes: population[i].genes.clone(),
            objectives: population[i].objectives.clone(),
        })
        .collect();
    Ok(ParetoFront {
        source,
        metadata,
        members,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveStats {
    pub name: String,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityStats {
    pub epsilon: f64,
    /// Connectivity fractions of the members whose two rate errors are both
    /// within `epsilon` of the balanced error, in member order.
    pub f_values: Vec<f64>,
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSummary {
    pub experiment: String,
    pub generation: usize,
    pub size: usize,
    pub objectives: Vec<ObjectiveStats>,
    /// Smallest larger-of-the-two rate errors over the front.
    pub balanced_error: f64,
    /// Member index attaining `balanced_error`.
    pub balanced_member: usize,
    pub balanced_objectives: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<SparsityStats>,
}

/// Median with the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// Per-objective statistics, the best balanced member and, for fronts with
/// a third objective, the connectivity of the `epsilon`-best rate subset.
/// The first two objectives are taken to be the rate errors.
pub fn front_summary(front: &ParetoFront, epsilon: f64) -> Result<FrontSummary, SnnError> {
    if front.is_empty() {
        return Err(SnnError::EmptyPopulation);
    }
    let m = front.n_objectives();
    if m < 2 || front.members.iter().any(|x| x.objectives.len() != m) {
        return Err(SnnError::Domain("front members need at least two consistent objectives".into()));
    }
    let objectives = (0..m)
        .map(|k| {
            let col: Vec<f64> = front.members.iter().map(|x| x.objectives[k]).collect();
            ObjectiveStats {
                name: front.source.objective_names[k].clone(),
                min: col.iter().copied().fold(f64::INFINITY, f64::min),
                median: median(&col).unwrap_or(f64::NAN),
                max: col.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect::<Vec<_>>();

    let (best, balanced_error) = front
        .members
        .iter()
        .map(|x| x.objectives[0].max(x.objectives[1]))
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, e)| if e < acc.1 { (k, e) } else { acc });

    let sparsity = (m >= 3).then(|| {
        let bound = balanced_error + epsilon;
        let f_values: Vec<f64> = front
            .members
            .iter()
            .filter(|x| x.objectives[0] <= bound && x.objectives[1] <= bound)
            .map(|x| x.objectives[2])
            .collect();
        SparsityStats {
            epsilon,
            min: f_values.iter().copied().reduce(f64::min),
            median: median(&f_values),
            max: f_values.iter().copied().reduce(f64::max),
            f_values,
        }
    });

    Ok(FrontSummary {
        experiment: front.source.experiment.clone(),
        generation: front.source.generation,
        size: front.len(),
        objectives,
        balanced_error,
        balanced_member: front.members[best].index,
        balanced_objectives: front.members[best].objectives.clone(),
        sparsity,
    })
}

/// CSV text with header `experiment,generation,index,<genes>,<objectives>`.
pub fn front_csv(front: &ParetoFront) -> String {
    let mut out = String::from("experiment,generation,index");
    for name in front.source.gene_names.iter().chain(&front.source.objective_names) {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for m in &front.members {
        let _ = write!(out, "{},{},{}", front.source.experiment, front.source.generation, m.index);
        for v in m.genes.iter().chain(&m.objectives) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontFormat {
    Csv,
    Json,
}

pub fn export_front(front: &ParetoFront, path: &Path, format: FrontFormat) -> Result<(), SnnError> {
    let text = match format {
        FrontFormat::Csv => front_csv(front),
        FrontFormat::Json => {
            let mut s = serde_json::to_string_pretty(front).map_err(|e| SnnError::Json {
                path: path.to_path_buf(),
                source: e,
            })?;
            s.push('\n');
            s
        }
    };
    fs::write(path, text).map_err(|e| SnnError::io(path, e))
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64, SnnError> {
    field
        .parse()
        .map_err(|_| SnnError::parse(path, line, format!("bad number {field:?}")))
}

/// Reads a front CSV. The number of gene columns must be supplied since the
/// header alone does not say where genes end and objectives begin.
pub fn import_front_csv(path: &Path, n_genes: usize) -> Result<ParetoFront, SnnError> {
    let text = fs::read_to_string(path).map_err(|e| SnnError::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| SnnError::parse(path, 1, "empty file"))?
        .split(',')
        .collect();
    if header.len() < 3 + n_genes || header[..3] != ["experiment", "generation", "index"] {
        return Err(SnnError::parse(path, 1, "unexpected front header"));
    }
    let gene_names: Vec<String> = header[3..3 + n_genes].iter().map(|s| s.to_string()).collect();
    let objective_names: Vec<String> = header[3 + n_genes..].iter().map(|s| s.to_string()).collect();
    let mut experiment = String::new();
    let mut generation = 0;
    let mut members = Vec::new();
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(SnnError::parse(path, line_no, format!("expected {} fields", header.len())));
        }
        experiment = fields[0].to_string();
        generation = fields[1]
            .parse()
            .map_err(|_| SnnError::parse(path, line_no, "bad generation"))?;
        let index = fields[2]
            .parse()
            .map_err(|_| SnnError::parse(path, line_no, "bad index"))?;
        let values = fields[3..]
            .iter()
            .map(|f| parse_f64(path, line_no, f))
            .collect::<Result<Vec<_>, _>>()?;
        members.push(FrontMember {
            index,
            genes: values[..n_genes].to_vec(),
            objectives: values[n_genes..].to_vec(),
        });
    }
    Ok(ParetoFront {
        source: FrontSource {
            experiment,
            generation,
            gene_names,
            objective_names,
        },
        metadata: FrontMetadata::default(),
        members,
    })
}

pub fn import_front_json(path: &Path) -> Result<ParetoFront, SnnError> {
    let text = fs::read_to_string(path).map_err(|e| SnnError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| SnnError::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// CSV text with header `generation,index,rank,<genes>,<objectives>`.
pub fn population_csv(generation: &Generation, gene_names: &[String], objective_names: &[String]) -> String {
    let mut out = String::from("generation,index,rank");
    for name in gene_names.iter().chain(objective_names) {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, ind) in generation.population.iter().enumerate() {
        let _ = write!(out, "{},{},{}", generation.index, i, ind.rank);
        for v in ind.genes.iter().chain(&ind.objectives) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Reads a population written by [`population_csv`]. Evaluation tags are
/// not stored, so each member is tagged with its generation and row.
pub fn import_population_csv(path: &Path, n_genes: usize) -> Result<(usize, Vec<Individual>), SnnError> {
    let text = fs::read_to_string(path).map_err(|e| SnnError::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| SnnError::parse(path, 1, "empty file"))?
        .split(',')
        .collect();
    if header.len() < 3 + n_genes || header[..3] != ["generation", "index", "rank"] {
        return Err(SnnError::parse(path, 1, "unexpected population header"));
    }
    let mut generation = 0;
    let mut pop = Vec::new();
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(SnnError::parse(path, line_no, format!("expected {} fields", header.len())));
        }
        generation = fields[0]
            .parse()
            .map_err(|_| SnnError::parse(path, line_no, "bad generation"))?;
        let index = fields[1]
            .parse()
            .map_err(|_| SnnError::parse(path, line_no, "bad index"))?;
        let rank = fields[2]
            .parse()
            .map_err(|_| SnnError::parse(path, line_no, "bad rank"))?;
        let values = fields[3..]
            .iter()
            .map(|f| parse_f64(path, line_no, f))
            .collect::<Result<Vec<_>, _>>()?;
        pop.push(Individual {
            genes: values[..n_genes].to_vec(),
            objectives: values[n_genes..].to_vec(),
            rank,
            niche: None,
            tag: EvalTag { generation, index },
        });
    }
    Ok((generation, pop))
}

const SERIES_COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Maps `t` in `[0, 1]` from dark blue to yellow.
fn gradient(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(68.0, 253.0), lerp(1.0, 231.0), lerp(84.0, 37.0))
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Scatter of the first two objectives of every front, one colour per
/// front. With a third objective the marker fill encodes it on a colour
/// scale and the series colour goes to the marker outline.
pub fn render_front_plot(fronts: &[ParetoFront], path: &Path, title: &str) -> Result<(), SnnError> {
    let svg = front_plot_svg(fronts, title)?;
    fs::write(path, svg).map_err(|e| SnnError::io(path, e))
}

pub fn front_plot_svg(fronts: &[ParetoFront], title: &str) -> Result<String, SnnError> {
    let m = fronts.first().map_or(2, ParetoFront::n_objectives);
    if m < 2 {
        return Err(SnnError::Domain("plots need at least two objectives".into()));
    }
    if fronts
        .iter()
        .any(|f| f.n_objectives() != m || f.members.iter().any(|x| x.objectives.len() != m))
    {
        return Err(SnnError::Domain("fronts have mixed objective dimensionality".into()));
    }
    let all = || fronts.iter().flat_map(|f| f.members.iter());
    let (x0, x1) = axis_range(all().map(|x| x.objectives[0]));
    let (y0, y1) = axis_range(all().map(|x| x.objectives[1]));
    let (c0, c1) = if m >= 3 {
        let (lo, hi) = all()
            .map(|x| x.objectives[2])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if lo.is_finite() {
            (lo, hi)
        } else {
            (0.0, 1.0)
        }
    } else {
        (0.0, 1.0)
    };

    let (w, h) = (720.0, 540.0);
    let (left, right, top, bottom) = (70.0, 190.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let sx = |v: f64| left + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| top + ph - (v - y0) / (y1 - y0) * ph;
    let names = &fronts.first().map(|f| f.source.objective_names.clone()).unwrap_or_default();
    let label = |k: usize| names.get(k).cloned().unwrap_or_else(|| format!("objective {k}"));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<g class="plot-area" data-xmin="{x0}" data-xmax="{x1}" data-ymin="{y0}" data-ymax="{y1}" data-left="{left}" data-top="{top}" data-width="{pw}" data-height="{ph}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="middle">{:.3}</text>"#,
            sx(xv),
            top + ph + 16.0,
            xv
        );
        let _ = writeln!(
            s,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
            left - 6.0,
            sy(yv) + 4.0,
            yv
        );
    }
    for (fi, front) in fronts.iter().enumerate() {
        let color = SERIES_COLORS[fi % SERIES_COLORS.len()];
        for x in &front.members {
            let (fill, stroke) = if m >= 3 {
                let t = if c1 > c0 { (x.objectives[2] - c0) / (c1 - c0) } else { 0.0 };
                (gradient(t), color.to_string())
            } else {
                (color.to_string(), "none".to_string())
            };
            let _ = writeln!(
                s,
                r#"<circle class="point" data-series="{fi}" data-x="{}" data-y="{}" cx="{:.3}" cy="{:.3}" r="4" fill="{fill}" stroke="{stroke}" stroke-width="1.5"/>"#,
                x.objectives[0],
                x.objectives[1],
                sx(x.objectives[0]),
                sy(x.objectives[1])
            );
        }
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{} (Hz)</text>"#,
        left + pw / 2.0,
        h - 20.0,
        escape(&label(0))
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" transform="rotate(-90 18 {0})" text-anchor="middle">{1} (Hz)</text>"#,
        top + ph / 2.0,
        escape(&label(1))
    );

    let lx = left + pw + 20.0;
    for (fi, front) in fronts.iter().enumerate() {
        let color = SERIES_COLORS[fi % SERIES_COLORS.len()];
        let y = top + 10.0 + 20.0 * fi as f64;
        let _ = writeln!(
            s,
            r#"<g class="legend-entry"><circle cx="{lx}" cy="{y}" r="5" fill="{color}"/><text x="{}" y="{}">{}</text></g>"#,
            lx + 10.0,
            y + 4.0,
            escape(&front.source.experiment)
        );
    }
    if m >= 3 {
        let y = top + 30.0 + 20.0 * fronts.len() as f64;
        let _ = writeln!(s, r#"<text x="{lx}" y="{y}">fill: {}</text>"#, escape(&label(2)));
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let yy = y + 12.0 + 16.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{lx}" y="{yy}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{:.3}</text>"#,
                gradient(t),
                lx + 18.0,
                yy + 10.0,
                c0 + t * (c1 - c0)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
