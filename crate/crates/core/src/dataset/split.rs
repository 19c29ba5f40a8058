//! Deterministic space-train / probe-train / test partitioning.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

// Stream ids; class/label indices are added on top.
const STRATIFIED_STREAM: u64 = 0x1000_0000;
const GROUP_ORDER_STREAM: u64 = 0x2000_0000;
const GROUP_ROWS_STREAM: u64 = 0x3000_0000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SplitMode {
    /// Per-class shuffling of the named concept (first concept when `None`).
    RandomStratified { stratify_by: Option<String> },
    /// Whole label groups of `concept` go either to space-train or to the
    /// probe-train/test side; the latter is then split within each group.
    DisjointLabel { concept: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    pub mode: SplitMode,
    /// `(space_train, probe_train, test)`, summing to 1.
    pub fractions: [f64; 3],
    /// Dataset identifiers when the roles come from distinct files.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub source: Vec<String>,
}

impl SplitSpec {
    pub fn stratified(seed: u64, fractions: [f64; 3]) -> Self {
        SplitSpec { seed, mode: SplitMode::RandomStratified { stratify_by: None }, fractions, source: Vec::new() }
    }

    pub fn disjoint_label(seed: u64, concept: impl Into<String>, fractions: [f64; 3]) -> Self {
        SplitSpec {
            seed,
            mode: SplitMode::DisjointLabel { concept: concept.into() },
            fractions,
            source: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            return Err(Error::Config(format!("split fractions must be positive, got {:?}", self.fractions)));
        }
        let sum: f64 = self.fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

/// Sorted row indices of the three roles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub space_train: Vec<usize>,
    pub probe_train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    pub fn parts(&self) -> [&[usize]; 3] {
        [&self.space_train, &self.probe_train, &self.test]
    }
}

/// Largest-remainder apportionment of `n` items by `fractions`.
fn apportion(n: usize, fractions: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts = [0usize; 3];
    for j in 0..3 {
        counts[j] = exact[j].floor() as usize;
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = n - counts.iter().sum::<usize>();
    for &j in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[j] += 1;
        left -= 1;
    }
    counts
}

fn stratified(ds: &LabeledDataset, spec: &SplitSpec, by: Option<&str>) -> Result<SplitIndices> {
    let concept = match by {
        Some(name) => ds.concept(name)?,
        None => ds
            .concepts()
            .first()
            .ok_or_else(|| Error::Config("stratified split needs at least one concept".into()))?,
    };
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); concept.num_classes()];
    for (i, &l) in concept.labels().iter().enumerate() {
        groups[l as usize].push(i);
    }

    let targets = apportion(ds.n(), &spec.fractions);
    let mut per_class: Vec<[usize; 3]> = Vec::with_capacity(groups.len());
    let mut assigned = [0usize; 3];
    for g in &groups {
        let mut c = [0usize; 3];
        for j in 0..3 {
            c[j] = (spec.fractions[j] * g.len() as f64).floor() as usize;
            assigned[j] += c[j];
        }
        per_class.push(c);
    }
    // Distribute each class's leftover rows (at most one per role) to the
    // roles that are furthest below their global target.
    for (g, c) in groups.iter().zip(per_class.iter_mut()) {
        let mut left = g.len() - c.iter().sum::<usize>();
        let mut used = [false; 3];
        while left > 0 {
            let j = (0..3)
                .filter(|&j| !used[j])
                .max_by(|&a, &b| {
                    let da = targets[a] as i64 - assigned[a] as i64;
                    let db = targets[b] as i64 - assigned[b] as i64;
                    da.cmp(&db).then(b.cmp(&a))
                })
                .expect("at most two leftovers per class");
            used[j] = true;
            c[j] += 1;
            assigned[j] += 1;
            left -= 1;
        }
    }

    let mut parts: [Vec<usize>; 3] = Default::default();
    for (class, (g, c)) in groups.iter().zip(&per_class).enumerate() {
        let mut rows = g.clone();
        rows.shuffle(&mut stream_rng(spec.seed, STRATIFIED_STREAM + class as u64));
        let mut it = rows.into_iter();
        for j in 0..3 {
            parts[j].extend(it.by_ref().take(c[j]));
        }
    }
    finish(parts)
}

fn disjoint_label(ds: &LabeledDataset, spec: &SplitSpec, name: &str) -> Result<SplitIndices> {
    let concept = ds.concept(name)?;
    let mut groups: Vec<(u32, Vec<usize>)> = Vec::new();
    {
        let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); concept.num_classes()];
        for (i, &l) in concept.labels().iter().enumerate() {
            by_label[l as usize].push(i);
        }
        for (l, rows) in by_label.into_iter().enumerate() {
            if !rows.is_empty() {
                groups.push((l as u32, rows));
            }
        }
    }
    // Seeded tie order, then greedy by descending group size.
    groups.shuffle(&mut stream_rng(spec.seed, GROUP_ORDER_STREAM));
    groups.sort_by(|a, b| b.1.len().cmp(&a.1.len()));

    let target = spec.fractions[0] * ds.n() as f64;
    let mut space_rows = 0usize;
    let mut space_groups = Vec::new();
    let mut rest_groups = Vec::new();
    for (label, rows) in groups {
        let with = (space_rows + rows.len()) as f64 - target;
        let without = space_rows as f64 - target;
        if with.abs() < without.abs() {
            space_rows += rows.len();
            space_groups.push((label, rows));
        } else {
            rest_groups.push((label, rows));
        }
    }
    if space_groups.len() < 2 || rest_groups.len() < 2 {
        return Err(Error::Config(format!(
            "disjoint-label split on `{name}` needs at least 2 labels per side, got {} / {}",
            space_groups.len(),
            rest_groups.len()
        )));
    }

    let probe_share = spec.fractions[1] / (spec.fractions[1] + spec.fractions[2]);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (_, rows) in space_groups {
        parts[0].extend(rows);
    }
    for (label, mut rows) in rest_groups {
        rows.shuffle(&mut stream_rng(spec.seed, GROUP_ROWS_STREAM + label as u64));
        let n = rows.len();
        let mut k = (probe_share * n as f64).round() as usize;
        if n >= 2 {
            k = k.clamp(1, n - 1);
        } else {
            k = n;
        }
        parts[1].extend_from_slice(&rows[..k]);
        parts[2].extend_from_slice(&rows[k..]);
    }
    finish(parts)
}

fn finish(mut parts: [Vec<usize>; 3]) -> Result<SplitIndices> {
    const ROLES: [&str; 3] = ["space-train", "probe-train", "test"];
    for (j, p) in parts.iter_mut().enumerate() {
        if p.is_empty() {
            return Err(Error::Config(format!("split fractions leave {} empty", ROLES[j])));
        }
        p.sort_unstable();
    }
    let [space_train, probe_train, test] = parts;
    Ok(SplitIndices { space_train, probe_train, test })
}

pub fn split_indices(ds: &LabeledDataset, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    match &spec.mode {
        SplitMode::RandomStratified { stratify_by } => stratified(ds, spec, stratify_by.as_deref()),
        SplitMode::DisjointLabel { concept } => disjoint_label(ds, spec, concept),
    }
}

/// `(space_train, probe_train, test)`.
pub fn split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset)> {
    let idx = split_indices(ds, spec)?;
    Ok((ds.subset(&idx.space_train)?, ds.subset(&idx.probe_train)?, ds.subset(&idx.test)?))
}
