//! CSV ingestion and seeded synthetic generators standing in for the
//! original (unavailable) microblog and Twitter datasets.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::bayes::{RepostDataset, RepostRow};
use crate::error::{Error, Result};
use crate::influence::{clamp01, gim_boost};
use crate::ml::LabeledDataset;

// ---------------------------------------------------------------------------
// synthetic generators

/// Repost data drawn at a known influence constant; the estimation
/// pipelines should recover `true_alpha` from it.
#[derive(Debug, Clone, Copy)]
pub struct RepostSpec {
    pub size: usize,
    pub seed: u64,
    pub true_alpha: f64,
    pub p0: f64,
    pub avg_friends: f64,
}

impl RepostSpec {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::Param("size must be at least 1".into()));
        }
        if !(self.avg_friends > 0.0) {
            return Err(Error::Param("avg_friends must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.p0) {
            return Err(Error::Param("p0 outside [0,1]".into()));
        }
        if self.true_alpha < 0.0 {
            return Err(Error::Param("true_alpha must be non-negative".into()));
        }
        Ok(())
    }
}

/// Repost counts from a geometric distribution with mean `avg_friends`,
/// outcomes from the GIM link at `true_alpha`. Pure function of the spec.
pub fn generate_repost_data(spec: &RepostSpec) -> Result<RepostDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let geom = Geometric::new(1.0 / (1.0 + spec.avg_friends))
        .map_err(|e| Error::Param(format!("geometric parameter: {e}")))?;
    let f = spec.avg_friends;
    let mut rows = Vec::with_capacity(spec.size);
    for i in 0..spec.size {
        let reposts = geom.sample(&mut rng);
        let p = clamp01(spec.p0 + gim_boost(spec.true_alpha * reposts as f64 / f, f));
        let outcome = u8::from(rng.gen::<f64>() < p);
        rows.push(RepostRow {
            post_id: i as u64,
            reposts,
            outcome,
        });
    }
    Ok(RepostDataset {
        rows,
        avg_friends: spec.avg_friends,
        p0: spec.p0,
    })
}

/// Binary classification data whose label is the majority of the first
/// `n_informative` features, flipped with probability `noise`.
#[derive(Debug, Clone, Copy)]
pub struct PlantedRuleSpec {
    pub size: usize,
    pub seed: u64,
    pub n_features: usize,
    pub n_informative: usize,
    pub noise: f64,
}

impl PlantedRuleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::Param("size must be at least 1".into()));
        }
        if self.n_informative == 0 || self.n_informative > self.n_features {
            return Err(Error::Param(
                "n_informative must be in 1..=n_features".into(),
            ));
        }
        if !(0.0..0.5).contains(&self.noise) {
            return Err(Error::Param("noise rate outside [0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Ground-truth label for a planted-rule feature vector (before noise).
pub fn planted_rule_label(features: &[usize], n_informative: usize) -> u8 {
    let ones = features[..n_informative].iter().filter(|&&v| v == 1).count();
    u8::from(2 * ones > n_informative)
}

pub fn generate_planted_rule(spec: &PlantedRuleSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.size);
    for _ in 0..spec.size {
        let features: Vec<usize> = (0..spec.n_features)
            .map(|_| usize::from(rng.gen_bool(0.5)))
            .collect();
        let mut label = planted_rule_label(&features, spec.n_informative);
        if rng.gen::<f64>() < spec.noise {
            label = 1 - label;
        }
        rows.push((features, label));
    }
    Ok(LabeledDataset {
        feature_names: (0..spec.n_features).map(|j| format!("f{j}")).collect(),
        feature_arity: vec![2; spec.n_features],
        rows,
    })
}

// ---------------------------------------------------------------------------
// repost CSV

/// Reads `post_id,reposts,outcome`. When `avg_friends` is not given, the
/// mean repost count stands in for the average friend count.
pub fn read_repost_csv(
    path: impl AsRef<Path>,
    p0: f64,
    avg_friends: Option<f64>,
) -> Result<RepostDataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => {
            return Err(Error::Parse {
                path: display,
                line: 0,
                msg: "empty file".into(),
            })
        }
    };
    if header.trim() != "post_id,reposts,outcome" {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: format!("expected header post_id,reposts,outcome, got {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: display,
                line: lineno,
                msg: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let parse_u64 = |s: &str, what: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("invalid {what} {s:?}"),
            })
        };
        let outcome = parse_u64(fields[2], "outcome")?;
        if outcome > 1 {
            return Err(Error::Parse {
                path: display,
                line: lineno,
                msg: format!("outcome {outcome} is not binary"),
            });
        }
        rows.push(RepostRow {
            post_id: parse_u64(fields[0], "post_id")?,
            reposts: parse_u64(fields[1], "reposts")?,
            outcome: outcome as u8,
        });
    }
    let avg_friends = match avg_friends {
        Some(f) => f,
        None => {
            if rows.is_empty() {
                return Err(Error::Input(
                    "avg_friends must be given explicitly for an empty dataset".into(),
                ));
            }
            rows.iter().map(|r| r.reposts as f64).sum::<f64>() / rows.len() as f64
        }
    };
    let data = RepostDataset {
        rows,
        avg_friends,
        p0,
    };
    data.validate()?;
    Ok(data)
}

pub fn write_repost_csv(data: &RepostDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "post_id,reposts,outcome")?;
    for row in &data.rows {
        writeln!(w, "{},{},{}", row.post_id, row.reposts, row.outcome)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// labeled CSV

/// How one CSV column was turned into category indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMapping {
    pub name: String,
    /// Category strings in index order.
    pub categories: Vec<String>,
    /// Column held plain non-negative integers used directly as indices.
    pub identity: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMapping {
    pub features: Vec<ColumnMapping>,
    pub label: ColumnMapping,
}

fn split_csv_line(line: &str) -> Vec<String> {
    line.trim().split(',').map(|s| s.trim().to_string()).collect()
}

fn map_column(name: &str, values: &[String]) -> (ColumnMapping, Vec<usize>) {
    let as_ints: Option<Vec<usize>> = values.iter().map(|v| v.parse().ok()).collect();
    if let Some(ints) = as_ints {
        let arity = ints.iter().max().copied().unwrap_or(0) + 1;
        let mapping = ColumnMapping {
            name: name.to_string(),
            categories: (0..arity).map(|v| v.to_string()).collect(),
            identity: true,
        };
        return (mapping, ints);
    }
    // nominal: category indices by first-appearance order
    let mut categories: Vec<String> = Vec::new();
    let mut ids = Vec::with_capacity(values.len());
    for v in values {
        let id = match categories.iter().position(|c| c == v) {
            Some(i) => i,
            None => {
                categories.push(v.clone());
                categories.len() - 1
            }
        };
        ids.push(id);
    }
    (
        ColumnMapping {
            name: name.to_string(),
            categories,
            identity: false,
        },
        ids,
    )
}

/// Reads a headered CSV of categorical features plus a binary label
/// column (`label_column` by name; defaults to a column named "label",
/// else the last column). Returns the dataset and the category mapping
/// used, so further files can be mapped consistently.
pub fn read_labeled_csv(
    path: impl AsRef<Path>,
    label_column: Option<&str>,
) -> Result<(LabeledDataset, DatasetMapping)> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();

    let header = match lines.next() {
        Some(line) => split_csv_line(&line?),
        None => {
            return Err(Error::Parse {
                path: display,
                line: 0,
                msg: "empty file".into(),
            })
        }
    };
    if header.len() < 2 {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "need at least one feature column and a label column".into(),
        });
    }
    let label_idx = match label_column {
        Some(name) => header.iter().position(|h| h == name).ok_or_else(|| {
            Error::Input(format!("label column {name:?} not found in header"))
        })?,
        None => header
            .iter()
            .position(|h| h == "label")
            .unwrap_or(header.len() - 1),
    };

    let mut columns: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_csv_line(&line);
        if fields.len() != header.len() {
            return Err(Error::Parse {
                path: display,
                line: lineno,
                msg: format!("expected {} fields, got {}", header.len(), fields.len()),
            });
        }
        for (c, v) in fields.into_iter().enumerate() {
            columns[c].push(v);
        }
    }
    let n_rows = columns[0].len();
    if n_rows == 0 {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "no data rows".into(),
        });
    }

    let mut feature_mappings = Vec::new();
    let mut feature_ids: Vec<Vec<usize>> = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if c == label_idx {
            continue;
        }
        let (mapping, ids) = map_column(name, &columns[c]);
        feature_mappings.push(mapping);
        feature_ids.push(ids);
    }
    let (label_mapping, label_ids) = map_column(&header[label_idx], &columns[label_idx]);
    for &v in &label_ids {
        if v > 1 {
            return Err(Error::Input(format!(
                "label column {:?} has more than two values",
                header[label_idx]
            )));
        }
    }

    let rows: Vec<(Vec<usize>, u8)> = (0..n_rows)
        .map(|r| {
            (
                feature_ids.iter().map(|col| col[r]).collect(),
                label_ids[r] as u8,
            )
        })
        .collect();
    let data = LabeledDataset {
        feature_names: feature_mappings.iter().map(|m| m.name.clone()).collect(),
        feature_arity: feature_mappings.iter().map(|m| m.categories.len()).collect(),
        rows,
    };
    data.validate()?;
    Ok((
        data,
        DatasetMapping {
            features: feature_mappings,
            label: label_mapping,
        },
    ))
}

/// Reads feature vectors using an existing mapping (e.g. the training
/// file's). The file must carry the same feature columns, in order; a
/// label column, if present, is ignored.
pub fn read_samples_csv(
    path: impl AsRef<Path>,
    mapping: &DatasetMapping,
) -> Result<Vec<Vec<usize>>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => split_csv_line(&line?),
        None => {
            return Err(Error::Parse {
                path: display,
                line: 0,
                msg: "empty file".into(),
            })
        }
    };
    let expected: Vec<&str> = mapping.features.iter().map(|m| m.name.as_str()).collect();
    if header.len() < expected.len()
        || header[..expected.len()] != expected[..]
    {
        return Err(Error::Input(format!(
            "sample header {header:?} does not start with the training features {expected:?}"
        )));
    }
    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_csv_line(&line);
        if fields.len() < expected.len() {
            return Err(Error::Parse {
                path: display,
                line: lineno,
                msg: format!("expected at least {} fields", expected.len()),
            });
        }
        let mut row = Vec::with_capacity(expected.len());
        for (j, m) in mapping.features.iter().enumerate() {
            let v = &fields[j];
            let id = if m.identity {
                v.parse::<usize>().ok().filter(|&x| x < m.categories.len())
            } else {
                m.categories.iter().position(|c| c == v)
            };
            match id {
                Some(id) => row.push(id),
                None => {
                    return Err(Error::Parse {
                        path: display,
                        line: lineno,
                        msg: format!("unknown category {v:?} for feature {}", m.name),
                    })
                }
            }
        }
        samples.push(row);
    }
    Ok(samples)
}

pub fn write_labeled_csv(data: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{},label", data.feature_names.join(","))?;
    for (features, label) in &data.rows {
        let cells: Vec<String> = features.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{},{}", cells.join(","), label)?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar file recording how nominal values were mapped to indices.
pub fn write_mapping(mapping: &DatasetMapping, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for m in &mapping.features {
        writeln!(w, "feature,{},{}", m.name, m.categories.join(","))?;
    }
    writeln!(w, "label,{},{}", mapping.label.name, mapping.label.categories.join(","))?;
    w.flush()?;
    Ok(())
}
