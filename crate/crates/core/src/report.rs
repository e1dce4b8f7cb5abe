//! Report assembly and rendering for the command-line front end.
//!
//! Every builder walks authors and papers in sorted id order and every
//! renderer is a pure function of the report value, so command output is
//! byte-identical across runs and input permutations. Three formats are
//! supported: an aligned text table, CSV, and JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::eigen::{self, StochasticMatrix, COLUMN_SUM_TOLERANCE};
use crate::graph::{AuthorId, CitationGraph, PaperId, RefCountMode, ValidationReport};
use crate::rank::{
    self, AuthorProfile, RankError, TimeWindow, WeightingStrategy, DEFAULT_ALPHA, DEFAULT_BETA,
};

/// Default classical comparison column: papers with more than 20 citations.
pub const DEFAULT_I_THRESHOLD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "json" | "json-like" => Ok(OutputFormat::Json),
            other => Err(format!(
                "unknown format `{other}` (expected `table`, `csv` or `json-like`)"
            )),
        }
    }
}

/// Knobs shared by the per-author reports.
#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub mode: RefCountMode,
    pub alpha: f64,
    pub beta: f64,
    pub i_threshold: usize,
    /// Filters the authors' own papers by publication year.
    pub window: TimeWindow,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            mode: RefCountMode::Bibliography,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            i_threshold: DEFAULT_I_THRESHOLD,
            window: TimeWindow::unbounded(),
        }
    }
}

/// One author line of the rank table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub author: AuthorId,
    pub subject: Option<String>,
    pub publications: usize,
    pub citation_sum: usize,
    pub paperrank_sum: f64,
    pub author_rank: f64,
    pub h_index: usize,
    pub h_alpha: usize,
    pub i_beta: usize,
    pub i_n: usize,
}

/// Full rank table plus the conservation footer totals: the sum of paper
/// scores (over papers in the window) and the sum of author scores agree to
/// rounding.
#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub mode: RefCountMode,
    pub alpha: f64,
    pub beta: f64,
    pub i_threshold: usize,
    pub window: TimeWindow,
    pub rows: Vec<ReportRow>,
    pub paper_rank_total: f64,
    pub author_rank_total: f64,
}

pub fn build_rank_report(
    graph: &CitationGraph,
    options: &ReportOptions,
) -> Result<RankReport, RankError> {
    let mut rows = Vec::new();
    let mut author_rank_total = 0.0;
    for profile in AuthorProfile::all_from(graph) {
        let visible = profile.restricted_to(graph, options.window);
        let author_rank = rank::authorrank(
            graph,
            &profile,
            options.mode,
            WeightingStrategy::Uniform,
            options.window,
        )?;
        author_rank_total += author_rank;
        rows.push(ReportRow {
            subject: modal_subject(graph, &visible),
            publications: visible.paper_count(),
            citation_sum: rank::sum_citations(graph, &visible)?,
            paperrank_sum: rank::sum_paperrank(graph, &visible, options.mode)?,
            author_rank,
            h_index: rank::h_index(graph, &visible)?,
            h_alpha: rank::h_alpha(graph, &visible, options.alpha, options.mode)?,
            i_beta: rank::i_beta(graph, &visible, options.beta, options.mode)?,
            i_n: rank::i_n_index(graph, &visible, options.i_threshold)?,
            author: profile.id,
        });
    }

    let mut paper_rank_total = 0.0;
    for id in graph.paper_ids() {
        if options.window.contains(graph.record(id)?.year) {
            paper_rank_total +=
                rank::paperrank(graph, id, options.mode, TimeWindow::unbounded())?;
        }
    }

    Ok(RankReport {
        mode: options.mode,
        alpha: options.alpha,
        beta: options.beta,
        i_threshold: options.i_threshold,
        window: options.window,
        rows,
        paper_rank_total,
        author_rank_total,
    })
}

/// Most frequent subject tag among the profile's papers; ties go to the
/// lexicographically smallest tag.
fn modal_subject(graph: &CitationGraph, profile: &AuthorProfile) -> Option<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for paper in profile.papers() {
        if let Ok(record) = graph.record(paper) {
            if let Some(subject) = &record.subject {
                *counts.entry(subject.as_str()).or_insert(0) += 1;
            }
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
        .map(|(subject, _)| subject.to_owned())
}

impl RankReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from(
                    "author,subject,publications,sum_citations,sum_paperrank,author_rank,h_index,h_alpha,i_beta,i_n\n",
                );
                for row in &self.rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{}",
                        csv_field(row.author.as_str()),
                        csv_field(row.subject.as_deref().unwrap_or("")),
                        row.publications,
                        row.citation_sum,
                        row.paperrank_sum,
                        row.author_rank,
                        row.h_index,
                        row.h_alpha,
                        row.i_beta,
                        row.i_n
                    );
                }
                out
            }
            OutputFormat::Table => {
                let header = [
                    "author".to_owned(),
                    "subject".to_owned(),
                    "#pub".to_owned(),
                    "sum-cit".to_owned(),
                    "sum-pr".to_owned(),
                    "author-rank".to_owned(),
                    "h".to_owned(),
                    format!("h_{}", self.alpha),
                    format!("i_{}", self.beta),
                    format!("i{}", self.i_threshold),
                ];
                let rows: Vec<Vec<String>> = self
                    .rows
                    .iter()
                    .map(|row| {
                        vec![
                            row.author.to_string(),
                            row.subject.clone().unwrap_or_else(|| "-".to_owned()),
                            row.publications.to_string(),
                            row.citation_sum.to_string(),
                            format_float(row.paperrank_sum),
                            format_float(row.author_rank),
                            row.h_index.to_string(),
                            row.h_alpha.to_string(),
                            row.i_beta.to_string(),
                            row.i_n.to_string(),
                        ]
                    })
                    .collect();
                let mut out = render_table(&header, &rows);
                let _ = writeln!(
                    out,
                    "total paper rank {} | total author rank {} | mode {}",
                    format_float(self.paper_rank_total),
                    format_float(self.author_rank_total),
                    self.mode
                );
                out
            }
        }
    }
}

/// Per-citer term of one paper's score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution {
    pub citer: PaperId,
    pub amount: f64,
}

/// Detail view of a single paper.
#[derive(Debug, Clone, Serialize)]
pub struct PaperDetail {
    pub id: PaperId,
    pub mode: RefCountMode,
    pub window: TimeWindow,
    pub paperrank: f64,
    pub citations: usize,
    /// Citations per unit of rank; `None` for uncited papers.
    pub rho: Option<f64>,
    pub contributions: Vec<Contribution>,
}

pub fn build_paper_detail(
    graph: &CitationGraph,
    id: &PaperId,
    mode: RefCountMode,
    window: TimeWindow,
) -> Result<PaperDetail, RankError> {
    let mut contributions = Vec::new();
    for citer in graph.citers(id)? {
        let record = graph.record(citer)?;
        if !window.contains(record.year) {
            continue;
        }
        let refs = graph.ref_count(citer, mode)?;
        if refs == 0 {
            return Err(RankError::InconsistentCiter {
                citer: citer.clone(),
            });
        }
        contributions.push(Contribution {
            citer: citer.clone(),
            amount: 1.0 / refs as f64,
        });
    }
    let paperrank = rank::paperrank(graph, id, mode, window)?;
    let citations = rank::citation_count(graph, id, window)?;
    let rho = if paperrank == 0.0 {
        None
    } else {
        Some(citations as f64 / paperrank)
    };
    Ok(PaperDetail {
        id: id.clone(),
        mode,
        window,
        paperrank,
        citations,
        rho,
        contributions,
    })
}

impl PaperDetail {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from("field,value\n");
                let _ = writeln!(out, "paper,{}", csv_field(self.id.as_str()));
                let _ = writeln!(out, "mode,{}", self.mode);
                let _ = writeln!(out, "paperrank,{}", format_float(self.paperrank));
                let _ = writeln!(out, "citations,{}", self.citations);
                let _ = writeln!(out, "rho,{}", render_rho(self.rho));
                for contribution in &self.contributions {
                    let _ = writeln!(
                        out,
                        "contribution:{},{}",
                        csv_field(contribution.citer.as_str()),
                        format_float(contribution.amount)
                    );
                }
                out
            }
            OutputFormat::Table => {
                let mut out = String::new();
                let _ = writeln!(out, "paper       {}", self.id);
                let _ = writeln!(out, "mode        {}", self.mode);
                let _ = writeln!(out, "paperrank   {}", format_float(self.paperrank));
                let _ = writeln!(out, "citations   {}", self.citations);
                let _ = writeln!(out, "rho         {}", render_rho(self.rho));
                if !self.contributions.is_empty() {
                    let _ = writeln!(out, "contributions:");
                    for contribution in &self.contributions {
                        let _ = writeln!(
                            out,
                            "  {}  {}",
                            contribution.citer,
                            format_float(contribution.amount)
                        );
                    }
                }
                out
            }
        }
    }
}

/// The per-author quantities a scatter plot can put on an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    SumCitations,
    SumPaperrank,
    AuthorRank,
    HIndex,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::SumCitations => "sumcit",
            Metric::SumPaperrank => "sumpr",
            Metric::AuthorRank => "authorrank",
            Metric::HIndex => "hindex",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sumcit" => Ok(Metric::SumCitations),
            "sumpr" => Ok(Metric::SumPaperrank),
            "authorrank" => Ok(Metric::AuthorRank),
            "hindex" => Ok(Metric::HIndex),
            other => Err(format!(
                "unknown metric `{other}` (expected sumcit, sumpr, authorrank or hindex)"
            )),
        }
    }
}

/// Closed-form least squares of y on x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionSummary {
    pub slope: f64,
    pub intercept: f64,
    pub samples: usize,
}

/// Least-squares line through `points`; `None` when fewer than two points
/// or all x values coincide.
pub fn linear_regression(points: &[(f64, f64)]) -> Option<RegressionSummary> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let count = n as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / count;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / count;
    let mut covariance = 0.0;
    let mut variance = 0.0;
    for (x, y) in points {
        covariance += (x - mean_x) * (y - mean_y);
        variance += (x - mean_x) * (x - mean_x);
    }
    if variance == 0.0 {
        return None;
    }
    let slope = covariance / variance;
    Some(RegressionSummary {
        slope,
        intercept: mean_y - slope * mean_x,
        samples: n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub author: AuthorId,
    pub x: f64,
    pub y: f64,
}

/// Scatter data for one metric pair, plus the regression line and, when the
/// two axes are AuthorRank and h-index, the y = x reference line.
#[derive(Debug, Clone, Serialize)]
pub struct ScatterReport {
    pub x_metric: Metric,
    pub y_metric: Metric,
    pub mode: RefCountMode,
    pub points: Vec<ScatterPoint>,
    pub excluded: Vec<AuthorId>,
    pub regression: Option<RegressionSummary>,
    /// True when comparing AuthorRank against h-index: plots should draw
    /// the y = x guide.
    pub identity_line: bool,
}

fn metric_value(
    graph: &CitationGraph,
    profile: &AuthorProfile,
    metric: Metric,
    mode: RefCountMode,
) -> Result<f64, RankError> {
    Ok(match metric {
        Metric::SumCitations => rank::sum_citations(graph, profile)? as f64,
        Metric::SumPaperrank => rank::sum_paperrank(graph, profile, mode)?,
        Metric::AuthorRank => rank::authorrank(
            graph,
            profile,
            mode,
            WeightingStrategy::Uniform,
            TimeWindow::unbounded(),
        )?,
        Metric::HIndex => rank::h_index(graph, profile)? as f64,
    })
}

pub fn build_scatter_report(
    graph: &CitationGraph,
    x_metric: Metric,
    y_metric: Metric,
    mode: RefCountMode,
    window: TimeWindow,
    excluded: &[AuthorId],
) -> Result<ScatterReport, RankError> {
    let mut points = Vec::new();
    let mut excluded_present = Vec::new();
    for profile in AuthorProfile::all_from(graph) {
        if excluded.contains(&profile.id) {
            excluded_present.push(profile.id);
            continue;
        }
        let visible = profile.restricted_to(graph, window);
        points.push(ScatterPoint {
            x: metric_value(graph, &visible, x_metric, mode)?,
            y: metric_value(graph, &visible, y_metric, mode)?,
            author: profile.id,
        });
    }
    let samples: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    let identity_line = matches!(
        (x_metric, y_metric),
        (Metric::HIndex, Metric::AuthorRank) | (Metric::AuthorRank, Metric::HIndex)
    );
    Ok(ScatterReport {
        x_metric,
        y_metric,
        mode,
        points,
        excluded: excluded_present,
        regression: linear_regression(&samples),
        identity_line,
    })
}

impl ScatterReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = format!("{},{},author\n", self.x_metric.name(), self.y_metric.name());
                for point in &self.points {
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        format_float(point.x),
                        format_float(point.y),
                        csv_field(point.author.as_str())
                    );
                }
                out
            }
            OutputFormat::Table => {
                let header = [
                    self.x_metric.name().to_owned(),
                    self.y_metric.name().to_owned(),
                    "author".to_owned(),
                ];
                let rows: Vec<Vec<String>> = self
                    .points
                    .iter()
                    .map(|p| {
                        vec![
                            format_float(p.x),
                            format_float(p.y),
                            p.author.to_string(),
                        ]
                    })
                    .collect();
                let mut out = render_table(&header, &rows);
                match &self.regression {
                    Some(regression) => {
                        let _ = writeln!(
                            out,
                            "regression slope {} intercept {} over {} authors",
                            format_float(regression.slope),
                            format_float(regression.intercept),
                            regression.samples
                        );
                    }
                    None => {
                        let _ = writeln!(out, "regression undefined");
                    }
                }
                if self.identity_line {
                    let _ = writeln!(out, "reference line y = x");
                }
                if !self.excluded.is_empty() {
                    let ids: Vec<&str> =
                        self.excluded.iter().map(|a| a.as_str()).collect();
                    let _ = writeln!(out, "excluded {}", ids.join(","));
                }
                out
            }
        }
    }
}

/// Outcome of the oracle checks run by the verify command.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub dimension: usize,
    pub dangling_columns: usize,
    pub first_step_holds: bool,
    pub first_step_deviation: f64,
    pub column_sum_defect: f64,
    pub power_converged: bool,
    pub power_iterations: usize,
    pub power_residual: f64,
    pub tolerance: f64,
    /// False on graphs with dangling papers: the model makes no convergence
    /// promise there, and a power-method miss is reported but not fatal.
    pub convergence_guaranteed: bool,
    pub passed: bool,
}

pub fn build_verify_report(
    graph: &CitationGraph,
    tolerance: f64,
    max_iterations: usize,
) -> Result<VerifyReport, RankError> {
    let matrix = StochasticMatrix::build(graph);
    let first_step = eigen::verify_first_step(graph).map_err(|err| match err {
        eigen::EigenError::Rank(inner) => inner,
        other => panic!("dimension mismatch cannot happen here: {other}"),
    })?;
    let column_sum_defect = matrix.column_sum_defect();
    let power = matrix.power_method(tolerance, max_iterations);
    let convergence_guaranteed = !matrix.has_dangling_columns();
    let passed = first_step.holds
        && column_sum_defect <= COLUMN_SUM_TOLERANCE
        && (power.converged || !convergence_guaranteed);
    Ok(VerifyReport {
        dimension: matrix.dimension(),
        dangling_columns: matrix.dangling_columns().len(),
        first_step_holds: first_step.holds,
        first_step_deviation: first_step.max_deviation,
        column_sum_defect,
        power_converged: power.converged,
        power_iterations: power.iterations,
        power_residual: power.residual,
        tolerance,
        convergence_guaranteed,
        passed,
    })
}

impl VerifyReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            _ => {
                let mut out = String::new();
                let _ = writeln!(out, "papers                {}", self.dimension);
                let _ = writeln!(out, "dangling papers       {}", self.dangling_columns);
                let _ = writeln!(
                    out,
                    "first-step identity   {} (max deviation {:e})",
                    pass_fail(self.first_step_holds),
                    self.first_step_deviation
                );
                let _ = writeln!(
                    out,
                    "column stochasticity  {} (max defect {:e})",
                    pass_fail(self.column_sum_defect <= COLUMN_SUM_TOLERANCE),
                    self.column_sum_defect
                );
                let _ = writeln!(
                    out,
                    "power method          {} after {} iterations (residual {:e}, tolerance {:e})",
                    if self.power_converged {
                        "converged"
                    } else {
                        "did not converge"
                    },
                    self.power_iterations,
                    self.power_residual,
                    self.tolerance
                );
                if !self.convergence_guaranteed {
                    let _ = writeln!(
                        out,
                        "note: dangling papers present, convergence not guaranteed"
                    );
                }
                let _ = writeln!(out, "verdict               {}", pass_fail(self.passed));
                out
            }
        }
    }
}

/// Validation findings plus build-time pruning, as printed by the validate
/// command.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationOutput {
    pub papers: usize,
    pub pruned_references: usize,
    pub report: ValidationReport,
    pub skipped_lines: Vec<crate::ingest::LineIssue>,
}

impl ValidationOutput {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => to_json(self),
            _ => {
                let mut out = String::new();
                let _ = writeln!(out, "papers               {}", self.papers);
                let _ = writeln!(out, "pruned references    {}", self.pruned_references);
                let _ = writeln!(
                    out,
                    "dangling (in-db)     {}",
                    join_ids(&self.report.dangling_in_database)
                );
                let _ = writeln!(
                    out,
                    "dangling (biblio)    {}",
                    join_ids(&self.report.dangling_bibliography)
                );
                let _ = writeln!(
                    out,
                    "self-citing          {}",
                    join_ids(&self.report.self_citing)
                );
                let orphan_ids: Vec<&str> = self
                    .report
                    .orphan_authors
                    .iter()
                    .map(|a| a.as_str())
                    .collect();
                let _ = writeln!(
                    out,
                    "uncited authors      {}",
                    if orphan_ids.is_empty() {
                        "-".to_owned()
                    } else {
                        orphan_ids.join(",")
                    }
                );
                for issue in &self.skipped_lines {
                    let _ = writeln!(out, "skipped line {}: {}", issue.line, issue.message);
                }
                out
            }
        }
    }
}

pub fn render_rho(rho: Option<f64>) -> String {
    match rho {
        Some(value) => format_float(value),
        None => "undefined".to_owned(),
    }
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn join_ids(ids: &[PaperId]) -> String {
    if ids.is_empty() {
        return "-".to_owned();
    }
    let strs: Vec<&str> = ids.iter().map(|id| id.as_str()).collect();
    strs.join(",")
}

/// Shortest round-trip decimal of an f64.
fn format_float(value: f64) -> String {
    format!("{value}")
}

fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_owned()
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (index, cell) in row.iter().enumerate() {
            widths[index] = widths[index].max(cell.len());
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String], widths: &[usize]| -> String {
        let mut line = String::new();
        for (index, cell) in cells.iter().enumerate() {
            if index > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            if index + 1 < cells.len() {
                line.push_str(&" ".repeat(widths[index].saturating_sub(cell.len())));
            }
        }
        line
    };
    out.push_str(&render_row(header, &widths));
    out.push('\n');
    for row in rows {
        out.push_str(&render_row(row, &widths));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::{g4, random_graph};

    fn aid(s: &str) -> AuthorId {
        AuthorId::from(s)
    }

    #[test]
    fn rank_report_reproduces_the_reference_values() {
        let report = build_rank_report(&g4(), &ReportOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 3);
        let by_author: BTreeMap<&str, &ReportRow> = report
            .rows
            .iter()
            .map(|row| (row.author.as_str(), row))
            .collect();
        assert_eq!(by_author["A1"].paperrank_sum, 1.25);
        assert_eq!(by_author["A1"].author_rank, 1.25);
        assert_eq!(by_author["A2"].paperrank_sum, 0.5);
        assert_eq!(by_author["A2"].author_rank, 0.5);
        assert_eq!(by_author["A3"].paperrank_sum, 0.0);
        assert_eq!(by_author["A3"].author_rank, 0.0);
        assert_eq!(by_author["A1"].citation_sum, 3);
        assert_eq!(by_author["A1"].h_index, 1);
        // h_alpha at 0.01: A1's single share 1.25 supports p = 1.
        assert_eq!(by_author["A1"].h_alpha, 1);
        assert_eq!(by_author["A1"].i_beta, 1);
        assert_eq!(by_author["A3"].i_beta, 0);
        assert!((report.paper_rank_total - 1.75).abs() < 1e-15);
        assert!((report.author_rank_total - 1.75).abs() < 1e-15);
    }

    #[test]
    fn conservation_footer_holds_on_random_graphs() {
        for seed in 0..20u64 {
            let graph = random_graph(seed, 60);
            for mode in [RefCountMode::Bibliography, RefCountMode::InDatabase] {
                let report = build_rank_report(
                    &graph,
                    &ReportOptions {
                        mode,
                        ..ReportOptions::default()
                    },
                )
                .unwrap();
                let scale = report.paper_rank_total.abs().max(1.0);
                assert!(
                    (report.paper_rank_total - report.author_rank_total).abs() <= 1e-9 * scale
                );
                // Row-level sanity: undivided paper sum dominates the
                // author's divided rank, equality only for solo authors.
                for row in &report.rows {
                    assert!(row.paperrank_sum >= row.author_rank - 1e-12);
                    let all_solo = graph
                        .records()
                        .filter(|r| r.authors.contains(&row.author))
                        .all(|r| r.author_count() == 1);
                    if all_solo {
                        assert_eq!(row.paperrank_sum, row.author_rank);
                    }
                }
            }
        }
    }

    #[test]
    fn empty_graph_renders_an_empty_report() {
        let graph = crate::graph::CitationGraph::build(Vec::new())
            .unwrap()
            .into_graph();
        let report = build_rank_report(&graph, &ReportOptions::default()).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.paper_rank_total, 0.0);
        for format in [OutputFormat::Table, OutputFormat::Csv, OutputFormat::Json] {
            assert!(!report.render(format).is_empty());
        }
    }

    #[test]
    fn paper_detail_lists_per_citer_contributions() {
        let detail = build_paper_detail(
            &g4(),
            &PaperId::from("P1"),
            RefCountMode::Bibliography,
            TimeWindow::unbounded(),
        )
        .unwrap();
        assert_eq!(detail.paperrank, 1.25);
        assert_eq!(detail.citations, 3);
        assert!((detail.rho.unwrap() - 2.4).abs() < 1e-12);
        assert_eq!(
            detail.contributions,
            vec![
                Contribution {
                    citer: PaperId::from("P2"),
                    amount: 0.5
                },
                Contribution {
                    citer: PaperId::from("P3"),
                    amount: 0.5
                },
                Contribution {
                    citer: PaperId::from("P4"),
                    amount: 0.25
                },
            ]
        );

        let uncited = build_paper_detail(
            &g4(),
            &PaperId::from("P4"),
            RefCountMode::Bibliography,
            TimeWindow::unbounded(),
        )
        .unwrap();
        assert_eq!(uncited.rho, None);
        assert!(uncited.render(OutputFormat::Table).contains("undefined"));
        assert!(uncited.render(OutputFormat::Json).contains("\"rho\": null"));
    }

    #[test]
    fn regression_matches_closed_form() {
        let exact = linear_regression(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert_eq!(exact.slope, 1.0);
        assert_eq!(exact.intercept, 0.0);
        assert_eq!(exact.samples, 3);

        let half = linear_regression(&[(0.0, 0.0), (2.0, 1.0)]).unwrap();
        assert_eq!(half.slope, 0.5);
        assert_eq!(half.intercept, 0.0);

        assert!(linear_regression(&[]).is_none());
        assert!(linear_regression(&[(1.0, 1.0)]).is_none());
        assert!(linear_regression(&[(1.0, 1.0), (1.0, 2.0)]).is_none());

        // Independent normal-equations oracle on a seeded cloud.
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(11);
        let points: Vec<(f64, f64)> = (0..100)
            .map(|_| {
                let x: f64 = rng.random_range(0.0..50.0);
                (x, 3.0 * x - 7.0 + rng.random_range(-1.0..1.0))
            })
            .collect();
        let fit = linear_regression(&points).unwrap();
        let n = points.len() as f64;
        let sum_x: f64 = points.iter().map(|(x, _)| x).sum();
        let sum_y: f64 = points.iter().map(|(_, y)| y).sum();
        let sum_xy: f64 = points.iter().map(|(x, y)| x * y).sum();
        let sum_xx: f64 = points.iter().map(|(x, _)| x * x).sum();
        let slope = (n * sum_xy - sum_x * sum_y) / (n * sum_xx - sum_x * sum_x);
        let intercept = (sum_y - slope * sum_x) / n;
        assert!((fit.slope - slope).abs() < 1e-12);
        assert!((fit.intercept - intercept).abs() < 1e-12);
    }

    #[test]
    fn scatter_report_is_consistent_with_the_rank_table() {
        let graph = g4();
        let scatter = build_scatter_report(
            &graph,
            Metric::SumCitations,
            Metric::AuthorRank,
            RefCountMode::Bibliography,
            TimeWindow::unbounded(),
            &[],
        )
        .unwrap();
        let rank = build_rank_report(&graph, &ReportOptions::default()).unwrap();
        assert_eq!(scatter.points.len(), rank.rows.len());
        for (point, row) in scatter.points.iter().zip(&rank.rows) {
            assert_eq!(point.author, row.author);
            assert_eq!(point.x, row.citation_sum as f64);
            assert_eq!(point.y, row.author_rank);
        }
        assert!(!scatter.identity_line);

        let identity = build_scatter_report(
            &graph,
            Metric::HIndex,
            Metric::AuthorRank,
            RefCountMode::Bibliography,
            TimeWindow::unbounded(),
            &[],
        )
        .unwrap();
        assert!(identity.identity_line);
        assert!(identity
            .render(OutputFormat::Table)
            .contains("reference line y = x"));
    }

    #[test]
    fn scatter_exclusions_remove_rows_and_shift_the_fit() {
        let graph = g4();
        let all = build_scatter_report(
            &graph,
            Metric::SumCitations,
            Metric::SumPaperrank,
            RefCountMode::Bibliography,
            TimeWindow::unbounded(),
            &[],
        )
        .unwrap();
        let trimmed = build_scatter_report(
            &graph,
            Metric::SumCitations,
            Metric::SumPaperrank,
            RefCountMode::Bibliography,
            TimeWindow::unbounded(),
            &[aid("A1")],
        )
        .unwrap();
        assert_eq!(all.points.len(), 3);
        assert_eq!(trimmed.points.len(), 2);
        assert_eq!(trimmed.excluded, vec![aid("A1")]);
        assert_ne!(
            all.regression.map(|r| r.slope),
            trimmed.regression.map(|r| r.slope)
        );
    }

    #[test]
    fn verify_report_passes_on_g4_and_flags_dangling() {
        let report = build_verify_report(&g4(), 1e-10, 1000).unwrap();
        assert!(report.first_step_holds);
        assert!(report.passed);
        assert_eq!(report.dangling_columns, 1);
        assert!(!report.convergence_guaranteed);
        let text = report.render(OutputFormat::Table);
        assert!(text.contains("convergence not guaranteed"));

        let ring = build_verify_report(&crate::testkit::cycle(3), 1e-12, 100).unwrap();
        assert!(ring.passed);
        assert!(ring.power_converged);
        assert_eq!(ring.power_iterations, 1);
        assert!(ring.convergence_guaranteed);
    }

    #[test]
    fn rendering_is_deterministic() {
        let graph = g4();
        let report = build_rank_report(&graph, &ReportOptions::default()).unwrap();
        for format in [OutputFormat::Table, OutputFormat::Csv, OutputFormat::Json] {
            assert_eq!(report.render(format), report.render(format));
        }
    }
}
