//! Self-contained SVG charts of the normalized sweep curves.
//!
//! One chart group per path-loss exponent: x is the normalized user
//! intensity, y the normalized metric, one polyline per scheme with 95% CI
//! whiskers. The baseline scheme's smallest-λ point sits at y = 1 by
//! construction of the normalization.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::str::FromStr;

use converge_core::metrics::Scheme;
use converge_core::{SweepPoint, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMetric {
    Interference,
    Efficiency,
}

impl PlotMetric {
    fn title(&self) -> &'static str {
        match self {
            PlotMetric::Interference => "normalized average interference",
            PlotMetric::Efficiency => "normalized average energy efficiency",
        }
    }

    fn norm_value(&self, p: &SweepPoint) -> f64 {
        match self {
            PlotMetric::Interference => p.norm_interference,
            PlotMetric::Efficiency => p.norm_eff,
        }
    }

    /// CI half-width mapped into normalized units.
    fn norm_ci(&self, p: &SweepPoint) -> Option<f64> {
        let (mean, ci) = match self {
            PlotMetric::Interference => (p.mean_interference_w, p.ci95_interference_w?),
            PlotMetric::Efficiency => (p.mean_eff_bpj, p.ci95_eff_bpj?),
        };
        if mean == 0.0 {
            return None;
        }
        Some(ci * self.norm_value(p) / mean)
    }
}

impl FromStr for PlotMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "interference" => Ok(PlotMetric::Interference),
            "efficiency" => Ok(PlotMetric::Efficiency),
            other => Err(format!(
                "unknown metric '{other}' (expected interference or efficiency)"
            )),
        }
    }
}

fn scheme_color(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::MaxSinr => "#1f77b4",
        Scheme::InterferenceMin => "#d62728",
        Scheme::EnergyOpt => "#2ca02c",
    }
}

const WIDTH: f64 = 640.0;
const CHART_HEIGHT: f64 = 340.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 610.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 290.0;

pub fn write_plot<W: Write>(
    result: &SweepResult,
    metric: PlotMetric,
    writer: &mut W,
) -> io::Result<()> {
    let mut alphas: Vec<f64> = Vec::new();
    for p in &result.points {
        if !alphas.contains(&p.alpha) {
            alphas.push(p.alpha);
        }
    }
    let mut schemes: Vec<Scheme> = Vec::new();
    for p in &result.points {
        if !schemes.contains(&p.scheme) {
            schemes.push(p.scheme);
        }
    }

    let total_height = CHART_HEIGHT * alphas.len() as f64 + 10.0;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{total_height}" viewBox="0 0 {WIDTH} {total_height}" font-family="Helvetica, Arial, sans-serif" font-size="12">"#
    )
    .expect("string write");
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).expect("string write");

    for (chart_idx, &alpha) in alphas.iter().enumerate() {
        let rows: Vec<&SweepPoint> = result.points.iter().filter(|p| p.alpha == alpha).collect();
        let x_max = rows
            .iter()
            .map(|p| p.lambda_norm)
            .fold(f64::NEG_INFINITY, f64::max);
        let y_max = rows
            .iter()
            .map(|p| metric.norm_value(p) + metric.norm_ci(p).unwrap_or(0.0))
            .fold(f64::NEG_INFINITY, f64::max)
            .max(1.0);
        let x_scale = |x: f64| LEFT + (RIGHT - LEFT) * x / (x_max * 1.05);
        let y_scale = |y: f64| BOTTOM - (BOTTOM - TOP) * y / (y_max * 1.1);

        writeln!(
            svg,
            r#"<g class="chart" transform="translate(0,{})">"#,
            chart_idx as f64 * CHART_HEIGHT
        )
        .expect("string write");
        writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{} (alpha = {alpha})</text>"#,
            WIDTH / 2.0,
            metric.title()
        )
        .expect("string write");

        // axes
        writeln!(
            svg,
            r#"<line x1="{LEFT}" y1="{BOTTOM}" x2="{RIGHT}" y2="{BOTTOM}" stroke="black"/>"#
        )
        .expect("string write");
        writeln!(
            svg,
            r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{BOTTOM}" stroke="black"/>"#
        )
        .expect("string write");
        writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">normalized user intensity</text>"#,
            (LEFT + RIGHT) / 2.0,
            BOTTOM + 34.0
        )
        .expect("string write");

        // x ticks at the λ grid, y ticks on a 5-step grid
        let mut lambdas: Vec<f64> = rows.iter().map(|p| p.lambda_norm).collect();
        lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        lambdas.dedup();
        for &x in &lambdas {
            let px = x_scale(x);
            writeln!(
                svg,
                r#"<line x1="{px}" y1="{BOTTOM}" x2="{px}" y2="{}" stroke="black"/>"#,
                BOTTOM + 4.0
            )
            .expect("string write");
            writeln!(
                svg,
                r#"<text x="{px}" y="{}" text-anchor="middle">{x}</text>"#,
                BOTTOM + 18.0
            )
            .expect("string write");
        }
        for step in 0..=5 {
            let y = y_max * 1.1 * step as f64 / 5.0;
            let py = y_scale(y);
            writeln!(
                svg,
                r#"<line x1="{}" y1="{py}" x2="{LEFT}" y2="{py}" stroke="black"/>"#,
                LEFT - 4.0
            )
            .expect("string write");
            writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="end">{:.2}</text>"#,
                LEFT - 8.0,
                py + 4.0,
                y
            )
            .expect("string write");
        }

        for (scheme_idx, &scheme) in schemes.iter().enumerate() {
            let mut series: Vec<&SweepPoint> = rows
                .iter()
                .copied()
                .filter(|p| p.scheme == scheme)
                .collect();
            if series.is_empty() {
                continue;
            }
            series.sort_by(|a, b| a.lambda_norm.partial_cmp(&b.lambda_norm).unwrap());
            let color = scheme_color(scheme);

            let points: Vec<String> = series
                .iter()
                .map(|p| {
                    format!(
                        "{:.2},{:.2}",
                        x_scale(p.lambda_norm),
                        y_scale(metric.norm_value(p))
                    )
                })
                .collect();
            writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
                points.join(" ")
            )
            .expect("string write");

            for p in &series {
                let px = x_scale(p.lambda_norm);
                let py = y_scale(metric.norm_value(p));
                writeln!(
                    svg,
                    r#"<circle cx="{px:.2}" cy="{py:.2}" r="2.6" fill="{color}"/>"#
                )
                .expect("string write");
                if let Some(ci) = metric.norm_ci(p) {
                    let y_low = y_scale((metric.norm_value(p) - ci).max(0.0));
                    let y_high = y_scale(metric.norm_value(p) + ci);
                    writeln!(
                        svg,
                        r#"<line x1="{px:.2}" y1="{y_low:.2}" x2="{px:.2}" y2="{y_high:.2}" stroke="{color}"/>"#
                    )
                    .expect("string write");
                    for y in [y_low, y_high] {
                        writeln!(
                            svg,
                            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}"/>"#,
                            px - 3.0,
                            px + 3.0
                        )
                        .expect("string write");
                    }
                }
            }

            // legend
            let ly = TOP + 8.0 + 16.0 * scheme_idx as f64;
            writeln!(
                svg,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.8"/>"#,
                LEFT + 12.0,
                LEFT + 40.0
            )
            .expect("string write");
            writeln!(
                svg,
                r#"<text x="{}" y="{}">{scheme}</text>"#,
                LEFT + 46.0,
                ly + 4.0
            )
            .expect("string write");
        }
        writeln!(svg, "</g>").expect("string write");
    }
    writeln!(svg, "</svg>").expect("string write");
    writer.write_all(svg.as_bytes())
}

pub fn plot_string(result: &SweepResult, metric: PlotMetric) -> String {
    let mut buffer = Vec::new();
    write_plot(result, metric, &mut buffer).expect("in-memory write");
    String::from_utf8(buffer).expect("svg is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use converge_core::metrics::Provenance;

    fn point(scheme: Scheme, alpha: f64, lambda: f64, norm: f64) -> SweepPoint {
        SweepPoint {
            scheme,
            alpha,
            lambda_norm: lambda,
            drops: 10,
            mean_interference_w: norm * 2.0,
            ci95_interference_w: Some(0.1),
            mean_flow_bps: 1.0,
            mean_power_w: 1.0,
            mean_eff_bpj: norm * 3.0,
            ci95_eff_bpj: Some(0.2),
            norm_interference: norm,
            norm_eff: norm,
        }
    }

    fn result() -> SweepResult {
        let mut points = Vec::new();
        for &alpha in &[3.0, 4.0] {
            for &scheme in &[Scheme::MaxSinr, Scheme::InterferenceMin] {
                for (i, &lambda) in [0.5, 1.0, 2.0].iter().enumerate() {
                    let norm = if scheme == Scheme::MaxSinr {
                        1.0 + i as f64
                    } else {
                        0.5 + i as f64 * 0.8
                    };
                    points.push(point(scheme, alpha, lambda, norm));
                }
            }
        }
        SweepResult {
            points,
            provenance: Provenance {
                config_digest: "x".into(),
                master_seed: 0,
                resampled_drops: 0,
            },
        }
    }

    #[test]
    fn one_chart_group_per_alpha() {
        let svg = plot_string(&result(), PlotMetric::Interference);
        assert_eq!(svg.matches(r#"<g class="chart""#).count(), 2);
        assert!(svg.contains("alpha = 3"));
        assert!(svg.contains("alpha = 4"));
    }

    #[test]
    fn legend_lists_scheme_names() {
        let svg = plot_string(&result(), PlotMetric::Efficiency);
        assert!(svg.contains(">max-sinr</text>"));
        assert!(svg.contains(">interference-min</text>"));
    }

    #[test]
    fn polyline_count_matches_schemes_times_alphas() {
        let svg = plot_string(&result(), PlotMetric::Interference);
        assert_eq!(svg.matches("<polyline").count(), 4);
    }

    #[test]
    fn metric_parsing() {
        assert_eq!(
            "interference".parse::<PlotMetric>().unwrap(),
            PlotMetric::Interference
        );
        assert_eq!(
            "efficiency".parse::<PlotMetric>().unwrap(),
            PlotMetric::Efficiency
        );
        assert!("coverage".parse::<PlotMetric>().is_err());
    }
}
