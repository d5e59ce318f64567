//! Plain-text model files.
//!
//! ```text
//! rrclass-model 1
//! family linear
//! k 3
//! p 2
//! loss hinge
//! a 1.5e0
//! lambda 1e-2
//! penalty l2
//! matrix beta 3 2
//! <3 lines of 2 floats>
//! end
//! ```
//!
//! Floats are written in shortest round-trip exponent form, so loading a
//! saved model reproduces its margins bit for bit. Optional sections carry
//! the training normalizer, the selected threshold `delta`, and free-form
//! `meta` key/value pairs such as tuning results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::losses::{BentLoss, LossKind};
use crate::optim::{Classifier, KernelKind, KernelModel, KernelSpec, LinearModel, Model, Penalty};

use super::Normalizer;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "rrclass-model";

/// A model together with what is needed to apply it to raw inputs.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub model: Model,
    pub normalizer: Option<Normalizer>,
    pub delta: Option<f64>,
    pub meta: BTreeMap<String, String>,
}

impl ModelFile {
    pub fn new(model: impl Into<Model>) -> Self {
        ModelFile {
            model: model.into(),
            normalizer: None,
            delta: None,
            meta: BTreeMap::new(),
        }
    }

    pub fn to_text(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC} {FORMAT_VERSION}");
        let loss = self.model.loss();
        let loss_name = match loss.kind() {
            LossKind::BentHinge => "hinge",
            LossKind::BentDwd => "dwd",
            LossKind::Custom(_) => {
                return Err(Error::invalid("models with a custom loss cannot be saved"))
            }
        };
        match &self.model {
            Model::Linear(m) => {
                let k = m.k();
                let _ = writeln!(s, "family linear");
                let _ = writeln!(s, "k {k}");
                let _ = writeln!(s, "p {}", m.n_features());
                let _ = writeln!(s, "loss {loss_name}");
                let _ = writeln!(s, "a {:e}", loss.a());
                let _ = writeln!(s, "lambda {:e}", m.lambda());
                let _ = writeln!(s, "penalty {}", m.penalty().name());
                write_matrix(&mut s, "beta", m.beta(), k - 1);
            }
            Model::Kernel(m) => {
                let q = m.k() - 1;
                let p = m.n_features();
                let _ = writeln!(s, "family kernel");
                let _ = writeln!(s, "k {}", q + 1);
                let _ = writeln!(s, "p {p}");
                let _ = writeln!(s, "loss {loss_name}");
                let _ = writeln!(s, "a {:e}", loss.a());
                let _ = writeln!(s, "lambda {:e}", m.lambda());
                let kind = match m.kernel().kind {
                    KernelKind::Linear => "linear",
                    KernelKind::Gaussian => "gaussian",
                };
                let _ = writeln!(s, "kernel {kind}");
                let _ = writeln!(s, "bandwidth {:e}", m.kernel().bandwidth);
                let _ = writeln!(s, "penalize_intercept {}", m.penalize_intercept());
                write_matrix(&mut s, "support", m.support_points(), p);
                write_matrix(&mut s, "theta", m.theta(), q);
            }
        }
        if let Some(norm) = &self.normalizer {
            write_matrix(&mut s, "normalizer_mean", &norm.mean, norm.p().max(1));
            write_matrix(&mut s, "normalizer_sd", &norm.sd, norm.p().max(1));
            let flags: Vec<f64> = norm
                .zero_variance
                .iter()
                .map(|&z| if z { 1.0 } else { 0.0 })
                .collect();
            write_matrix(&mut s, "normalizer_zero_variance", &flags, norm.p().max(1));
        }
        if let Some(delta) = self.delta {
            let _ = writeln!(s, "delta {delta:e}");
        }
        for (key, value) in &self.meta {
            if key.contains(char::is_whitespace) || value.contains('\n') {
                return Err(Error::invalid(format!(
                    "meta entry '{key}' cannot be stored"
                )));
            }
            let _ = writeln!(s, "meta {key} {value}");
        }
        s.push_str("end\n");
        Ok(s)
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };

        let (line, header) = lines
            .next()
            .ok_or_else(|| err(1, "empty model file".into()))?;
        let mut it = header.split_whitespace();
        if it.next() != Some(MAGIC) {
            return Err(err(line, "not a model file".into()));
        }
        let version: u32 = it
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(line, "missing format version".into()))?;
        if version != FORMAT_VERSION {
            return Err(err(line, format!("unsupported format version {version}")));
        }

        let mut scalars: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut matrices: BTreeMap<String, (usize, Vec<f64>, usize)> = BTreeMap::new();
        let mut meta = BTreeMap::new();
        let mut ended = false;
        while let Some((line, l)) = lines.next() {
            let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            let rest = rest.trim();
            match key {
                "end" => {
                    ended = true;
                    break;
                }
                "meta" => {
                    let (k, v) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                    meta.insert(k.to_string(), v.trim().to_string());
                }
                "matrix" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    let dims = match parts.as_slice() {
                        [name, r, c] => r
                            .parse::<usize>()
                            .ok()
                            .zip(c.parse::<usize>().ok())
                            .map(|(r, c)| (name.to_string(), r, c)),
                        _ => None,
                    };
                    let (name, rows, cols) =
                        dims.ok_or_else(|| err(line, format!("bad matrix header '{l}'")))?;
                    let mut values = Vec::with_capacity(rows * cols);
                    for _ in 0..rows {
                        let (line, row) = lines
                            .next()
                            .ok_or_else(|| err(line, format!("matrix {name} is truncated")))?;
                        let parsed: std::result::Result<Vec<f64>, _> =
                            row.split_whitespace().map(str::parse::<f64>).collect();
                        let parsed = parsed
                            .map_err(|_| err(line, format!("bad number in matrix {name}")))?;
                        if parsed.len() != cols {
                            return Err(err(
                                line,
                                format!(
                                    "matrix {name}: expected {cols} values, found {}",
                                    parsed.len()
                                ),
                            ));
                        }
                        values.extend(parsed);
                    }
                    matrices.insert(name, (line, values, cols));
                }
                _ => {
                    scalars.insert(key.to_string(), (line, rest.to_string()));
                }
            }
        }
        if !ended {
            return Err(err(text.lines().count(), "missing 'end' line".into()));
        }

        let get = |key: &str| -> Result<&(usize, String)> {
            scalars
                .get(key)
                .ok_or_else(|| err(0, format!("missing key '{key}'")))
        };
        let num = |key: &str| -> Result<f64> {
            let (line, v) = get(key)?;
            v.parse()
                .map_err(|_| err(*line, format!("'{key}' is not a number")))
        };
        let int = |key: &str| -> Result<usize> {
            let (line, v) = get(key)?;
            v.parse()
                .map_err(|_| err(*line, format!("'{key}' is not an integer")))
        };
        let matrix = |key: &str| -> Result<Vec<f64>> {
            matrices
                .get(key)
                .map(|(_, v, _)| v.clone())
                .ok_or_else(|| err(0, format!("missing matrix '{key}'")))
        };

        let k = int("k")?;
        let p = int("p")?;
        let kind = LossKind::parse(&get("loss")?.1)?;
        let loss = BentLoss::with_slope(kind, num("a")?)?;
        let lambda = num("lambda")?;
        let model: Model = match get("family")?.1.as_str() {
            "linear" => {
                let penalty = Penalty::parse(&get("penalty")?.1)?;
                LinearModel::new(matrix("beta")?, p, k, penalty, lambda, loss)?.into()
            }
            "kernel" => {
                let spec = match get("kernel")?.1.as_str() {
                    "linear" => KernelSpec::linear(),
                    "gaussian" => KernelSpec::gaussian(num("bandwidth")?)?,
                    other => {
                        return Err(err(get("kernel")?.0, format!("unknown kernel '{other}'")))
                    }
                };
                let (line, v) = get("penalize_intercept")?;
                let pen = v
                    .parse::<bool>()
                    .map_err(|_| err(*line, "penalize_intercept must be true or false".into()))?;
                KernelModel::new(
                    matrix("theta")?,
                    matrix("support")?,
                    p,
                    k,
                    spec,
                    lambda,
                    loss,
                    pen,
                )?
                .into()
            }
            other => {
                return Err(err(
                    get("family")?.0,
                    format!("unknown model family '{other}'"),
                ))
            }
        };
        let normalizer = if matrices.contains_key("normalizer_mean") {
            let mean = matrix("normalizer_mean")?;
            let sd = matrix("normalizer_sd")?;
            let zero_variance: Vec<bool> = matrix("normalizer_zero_variance")?
                .into_iter()
                .map(|v| v != 0.0)
                .collect();
            if mean.len() != p || sd.len() != p || zero_variance.len() != p {
                return Err(err(
                    0,
                    "normalizer dimensions do not match the model".into(),
                ));
            }
            Some(Normalizer {
                mean,
                sd,
                zero_variance,
            })
        } else {
            None
        };
        let delta = if scalars.contains_key("delta") {
            Some(num("delta")?)
        } else {
            None
        };
        Ok(ModelFile {
            model,
            normalizer,
            delta,
            meta,
        })
    }
}

fn write_matrix(s: &mut String, name: &str, values: &[f64], cols: usize) {
    let rows = if cols == 0 { 0 } else { values.len() / cols };
    let _ = writeln!(s, "matrix {name} {rows} {cols}");
    for r in 0..rows {
        let row: Vec<String> = values[r * cols..(r + 1) * cols]
            .iter()
            .map(|v| format!("{v:e}"))
            .collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
}

pub fn save_model(path: impl AsRef<Path>, file: &ModelFile) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, file.to_text()?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelFile::from_text(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe() -> Vec<Vec<f64>> {
        vec![vec![0.3, -1.7], vec![1e-8, 2.0 / 3.0], vec![-5.0, 0.1]]
    }

    #[test]
    fn linear_round_trip_is_bit_exact() {
        let beta = vec![
            0.1,
            -1.0 / 3.0,
            2.0f64.sqrt(),
            1e-17,
            -7.25,
            std::f64::consts::PI,
        ];
        let m =
            LinearModel::new(beta, 2, 3, Penalty::L1, 0.01, BentLoss::dwd(1.5).unwrap()).unwrap();
        let mut file = ModelFile::new(m.clone());
        file.delta = Some(0.123456789);
        file.meta.insert("tune.a".into(), "a1".into());
        let text = file.to_text().unwrap();
        let back = ModelFile::from_text(&text, Path::new("mem")).unwrap();
        for x in probe() {
            assert_eq!(back.model.margins(&x).0, m.margins(&x).0);
        }
        assert_eq!(back.delta, Some(0.123456789));
        assert_eq!(back.meta["tune.a"], "a1");
        assert_eq!(back.model.loss(), m.loss());
    }

    #[test]
    fn kernel_round_trip_with_normalizer() {
        let m = KernelModel::new(
            vec![0.5, -0.25, 1.0 / 7.0],
            vec![0.1, 0.2, -0.3, 0.4],
            2,
            2,
            KernelSpec::gaussian(0.37).unwrap(),
            1e-3,
            BentLoss::hinge(3.0).unwrap(),
            false,
        )
        .unwrap();
        let mut file = ModelFile::new(m.clone());
        file.normalizer = Some(Normalizer {
            mean: vec![1.0, 2.0],
            sd: vec![0.5, 1.0],
            zero_variance: vec![false, true],
        });
        let text = file.to_text().unwrap();
        let back = ModelFile::from_text(&text, Path::new("mem")).unwrap();
        for x in probe() {
            assert_eq!(back.model.margins(&x).0, m.margins(&x).0);
        }
        assert_eq!(back.normalizer, file.normalizer);
    }

    #[test]
    fn rejects_corrupt_files() {
        let bad = [
            "",
            "hello 1\nend\n",
            "rrclass-model 9\nend\n",
            "rrclass-model 1\nfamily linear\n",
        ];
        for t in bad {
            assert!(ModelFile::from_text(t, Path::new("mem")).is_err(), "{t}");
        }
    }
}
