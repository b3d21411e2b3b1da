use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use super::manifest::{DatasetManifest, DistortionClass};
use super::regression::{fit_regression_with, LogisticForm, RegressionParams};
use super::stats::{pearson_cc, rmse, spearman_rho};
use super::EvalError;
use crate::baselines::{mean_de2000, psnr, ssim};
use crate::imageio::{load_image, RgbImage};
use crate::pcdm::{pcdm_score, PcdmConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Pcdm,
    Psnr,
    Ssim,
    De2000,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Psnr, Metric::De2000, Metric::Ssim, Metric::Pcdm];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Pcdm => "pcdm",
            Metric::Psnr => "psnr",
            Metric::Ssim => "ssim",
            Metric::De2000 => "de2000",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Pcdm => "PCDM",
            Metric::Psnr => "PSNR",
            Metric::Ssim => "SSIM",
            Metric::De2000 => "CIEDE2000",
        }
    }
}

impl FromStr for Metric {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| EvalError::UnknownMetric(s.to_string()))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    pub pcdm: PcdmConfig,
    pub form: LogisticForm,
}

/// Raw score of one pair. For PCDM this is the score (higher is worse),
/// not the residual.
pub fn score_pair(metric: Metric, reference: &RgbImage, distorted: &RgbImage, cfg: &PcdmConfig) -> Result<f64, EvalError> {
    Ok(match metric {
        Metric::Pcdm => pcdm_score(reference, distorted, cfg)?.score,
        Metric::Psnr => psnr(reference, distorted)?,
        Metric::Ssim => ssim(reference, distorted)?.score,
        Metric::De2000 => mean_de2000(reference, distorted)?,
    })
}

/// Statistics for one report cell: a distortion class, or all pairs when
/// `class` is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub class: Option<DistortionClass>,
    pub n: usize,
    pub pearson_cc: f64,
    pub rmse: f64,
    /// Rank correlation between raw scores and DMOS; its sign follows the
    /// metric's orientation (negative for PSNR and SSIM).
    pub spearman_rho: f64,
    pub params: RegressionParams,
}

impl CellStats {
    pub fn label(&self) -> &'static str {
        self.class.map_or("All", DistortionClass::label)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterRow {
    pub raw: f64,
    /// Prediction of the pair's class fit, or of the overall fit when the
    /// class could not be fitted on its own.
    pub regressed: f64,
    pub dmos: f64,
    pub class: DistortionClass,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub metric: Metric,
    pub form: LogisticForm,
    /// Per-class cells in report order, then the overall cell.
    pub cells: Vec<CellStats>,
    /// Classes present in the manifest that could not be fitted, with the reason.
    pub unfitted: Vec<(DistortionClass, String)>,
    /// Pairs dropped because the raw score was not finite (identical PSNR inputs).
    pub excluded: usize,
    pub scatter: Vec<ScatterRow>,
}

fn fit_cell(
    class: Option<DistortionClass>,
    raw: &[f64],
    dmos: &[f64],
    form: LogisticForm,
) -> Result<(CellStats, Vec<f64>), EvalError> {
    let params = fit_regression_with(raw, dmos, form)?;
    let predicted = params.predict_all(raw);
    let cell = CellStats {
        class,
        n: raw.len(),
        pearson_cc: pearson_cc(&predicted, dmos)?,
        rmse: rmse(&predicted, dmos)?,
        spearman_rho: spearman_rho(raw, dmos)?,
        params,
    };
    Ok((cell, predicted))
}

/// Scores every pair (in parallel), fits the logistic mapping per class and
/// overall, and collects correlation statistics and scatter data.
pub fn evaluate(manifest: &DatasetManifest, metric: Metric, opts: &EvalOptions) -> Result<MetricReport, EvalError> {
    if metric == Metric::Pcdm {
        opts.pcdm.validate()?;
    }
    let scores: Vec<Result<f64, EvalError>> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let wrap = |source: EvalError| EvalError::Pair {
                ref_path: e.ref_path.display().to_string(),
                dist_path: e.dist_path.display().to_string(),
                source: Box::new(source),
            };
            let r = load_image(&e.ref_path).map_err(|err| wrap(err.into()))?;
            let d = load_image(&e.dist_path).map_err(|err| wrap(err.into()))?;
            score_pair(metric, &r, &d, &opts.pcdm).map_err(wrap)
        })
        .collect();

    let mut kept = Vec::new();
    let mut excluded = 0;
    for (entry, score) in manifest.entries.iter().zip(scores) {
        let s = score?;
        if s.is_finite() {
            kept.push((entry, s));
        } else {
            excluded += 1;
        }
    }
    if excluded > 0 {
        log::warn!("{metric}: excluded {excluded} pair(s) with non-finite scores");
    }

    let all_raw: Vec<f64> = kept.iter().map(|(_, s)| *s).collect();
    let all_dmos: Vec<f64> = kept.iter().map(|(e, _)| e.dmos).collect();
    let (overall, overall_pred) = fit_cell(None, &all_raw, &all_dmos, opts.form)?;

    let mut regressed = overall_pred;
    let mut cells = Vec::new();
    let mut unfitted = Vec::new();
    for class in manifest.classes() {
        let idx: Vec<usize> = (0..kept.len()).filter(|&i| kept[i].0.class == class).collect();
        if idx.is_empty() {
            unfitted.push((class, "no finite scores".to_string()));
            continue;
        }
        let raw: Vec<f64> = idx.iter().map(|&i| all_raw[i]).collect();
        let dmos: Vec<f64> = idx.iter().map(|&i| all_dmos[i]).collect();
        match fit_cell(Some(class), &raw, &dmos, opts.form) {
            Ok((cell, pred)) => {
                for (&i, p) in idx.iter().zip(pred) {
                    regressed[i] = p;
                }
                cells.push(cell);
            }
            Err(err) => {
                log::warn!("{metric}: class {class} not fitted: {err}");
                unfitted.push((class, err.to_string()));
            }
        }
    }
    cells.push(overall);

    let scatter = kept
        .iter()
        .zip(regressed)
        .map(|((e, raw), regressed)| ScatterRow { raw: *raw, regressed, dmos: e.dmos, class: e.class })
        .collect();
    Ok(MetricReport { metric, form: opts.form, cells, unfitted, excluded, scatter })
}

/// A row of published LIVE (release 2) results, columns Jp2k, Jpeg, Wn,
/// Gblur, FF, All.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceRow {
    pub metric: &'static str,
    pub cc: [f64; 6],
    pub rmse: [f64; 6],
    /// Whether this tool can compute the metric itself.
    pub implemented: bool,
}

/// Published correlation results for comparison. MS-SSIM and CW-SSIM are
/// carried as literature values only.
pub fn literature_reference() -> &'static [ReferenceRow] {
    const ROWS: [ReferenceRow; 6] = [
        ReferenceRow {
            metric: "PSNR",
            cc: [0.923, 0.913, 0.945, 0.843, 0.887, 0.898],
            rmse: [9.92, 10.10, 8.34, 11.80, 10.22, 10.12],
            implemented: true,
        },
        ReferenceRow {
            metric: "CIEDE2000",
            cc: [0.954, 0.956, 0.981, 0.892, 0.850, 0.920],
            rmse: [7.61, 7.79, 5.64, 11.33, 11.92, 9.02],
            implemented: true,
        },
        ReferenceRow {
            metric: "SSIM",
            cc: [0.963, 0.957, 0.976, 0.940, 0.956, 0.945],
            rmse: [7.11, 7.74, 8.65, 7.54, 6.45, 7.52],
            implemented: true,
        },
        ReferenceRow {
            metric: "MS-SSIM",
            cc: [0.962, 0.961, 0.977, 0.943, 0.948, 0.946],
            rmse: [7.12, 7.30, 8.38, 7.38, 7.04, 7.43],
            implemented: false,
        },
        ReferenceRow {
            metric: "CW-SSIM",
            cc: [0.926, 0.927, 0.949, 0.768, 0.835, 0.872],
            rmse: [9.75, 9.30, 9.24, 14.45, 13.62, 10.87],
            implemented: false,
        },
        ReferenceRow {
            metric: "PCDM",
            cc: [0.956, 0.959, 0.979, 0.873, 0.849, 0.927],
            rmse: [7.49, 7.10, 5.08, 10.73, 11.96, 8.67],
            implemented: true,
        },
    ];
    &ROWS
}

const REFERENCE_COLUMNS: [&str; 6] = ["Jp2k", "Jpeg", "Wn", "Gblur", "FF", "All"];

impl MetricReport {
    pub fn overall(&self) -> &CellStats {
        self.cells.last().expect("overall cell is always present")
    }

    pub fn cell(&self, class: DistortionClass) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.class == Some(class))
    }

    /// Aligned plain-text table: one column per fitted class plus "All".
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let form = match self.form {
            LogisticForm::Standard => "standard",
            LogisticForm::AsPrinted => "as-printed",
        };
        let _ = writeln!(out, "Metric: {} (logistic form: {form})", self.metric.label());
        let _ = write!(out, "{:<14}", "");
        for c in &self.cells {
            let _ = write!(out, "{:>9}", c.label());
        }
        out.push('\n');
        let rows: [(&str, fn(&CellStats) -> String); 4] = [
            ("Pearson CC", |c| format!("{:.3}", c.pearson_cc)),
            ("RMSE", |c| format!("{:.2}", c.rmse)),
            ("Spearman", |c| format!("{:.3}", c.spearman_rho)),
            ("n", |c| c.n.to_string()),
        ];
        for (name, f) in rows {
            let _ = write!(out, "{name:<14}");
            for c in &self.cells {
                let _ = write!(out, "{:>9}", f(c));
            }
            out.push('\n');
        }
        if self.excluded > 0 {
            let _ = writeln!(out, "excluded pairs (non-finite score): {}", self.excluded);
        }
        for (class, why) in &self.unfitted {
            let _ = writeln!(out, "class {} not fitted: {why}", class.label());
        }

        out.push_str("\nPublished LIVE reference values (MS-SSIM and CW-SSIM are literature values only):\n");
        for (title, pick) in [("Pearson CC", 0usize), ("RMSE", 1)] {
            let _ = write!(out, "{title:<14}");
            for col in REFERENCE_COLUMNS {
                let _ = write!(out, "{col:>9}");
            }
            out.push('\n');
            for row in literature_reference() {
                let vals = if pick == 0 { row.cc } else { row.rmse };
                let name = if row.implemented { row.metric.to_string() } else { format!("{}*", row.metric) };
                let _ = write!(out, "{name:<14}");
                for v in vals {
                    if pick == 0 {
                        let _ = write!(out, "{v:>9.3}");
                    } else {
                        let _ = write!(out, "{v:>9.2}");
                    }
                }
                out.push('\n');
            }
        }
        out.push_str("* not computed by this tool\n");
        out
    }

    /// Machine-readable report, one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,class,n,pearson_cc,rmse,spearman_rho,beta1,beta2,beta3,beta4,beta5\n");
        for c in &self.cells {
            let class = c.class.map_or("all", DistortionClass::as_str);
            let b = c.params.as_array();
            let _ = writeln!(
                out,
                "{},{class},{},{},{},{},{},{},{},{},{}",
                self.metric, c.n, c.pearson_cc, c.rmse, c.spearman_rho, b[0], b[1], b[2], b[3], b[4]
            );
        }
        out
    }

    /// Scatter data with header `raw,regressed,dmos,class`.
    pub fn scatter_csv(&self) -> String {
        let mut out = String::from("raw,regressed,dmos,class\n");
        for r in &self.scatter {
            let _ = writeln!(out, "{},{},{},{}", r.raw, r.regressed, r.dmos, r.class);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.as_str().parse::<Metric>().unwrap(), m);
        }
        assert!(matches!("vif".parse::<Metric>(), Err(EvalError::UnknownMetric(_))));
    }

    #[test]
    fn reference_rows_match_published_pcdm_cells() {
        let pcdm = literature_reference().iter().find(|r| r.metric == "PCDM").unwrap();
        assert_eq!(pcdm.cc[2], 0.979);
        assert_eq!(pcdm.cc[5], 0.927);
        assert_eq!(pcdm.rmse[2], 5.08);
        assert_eq!(literature_reference().iter().filter(|r| !r.implemented).count(), 2);
    }
}
