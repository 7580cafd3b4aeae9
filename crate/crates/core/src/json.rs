//! JSON forms of the library types.
//!
//! Complex numbers are `[re, im]` pairs. Functions whose imaginary parts all
//! vanish are written in a compact real form flagged with `"real": true`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::czop::{AccretiveSystem, PerfectDyadicKernel, Side, SubtreeDecomposition};
use crate::decompose::{AtomicDecomposition, Measured, Selection, TreeDecomposition};
use crate::dyadic::{DyadicInterval, GridConfig, TileSet, Tree};
use crate::error::{Error, Result};
use crate::function_space::{wavelet_transform, DyadicFunction, Weights};

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn grid_of(m: u32) -> Result<GridConfig> {
    GridConfig::new(m)
}

fn interval(grid: GridConfig, k: i32, j: u64) -> Result<DyadicInterval> {
    grid.interval(k, j)
}

pub fn to_string<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_str<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellValues {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl CellValues {
    fn from_complex(values: &[Complex64]) -> (bool, Self) {
        if values.iter().all(|z| z.im == 0.0) {
            (true, CellValues::Real(values.iter().map(|z| z.re).collect()))
        } else {
            (false, CellValues::Complex(values.iter().map(|&z| pair(z)).collect()))
        }
    }

    fn to_complex(&self, real: bool) -> Result<Vec<Complex64>> {
        match (self, real) {
            (CellValues::Real(v), true) => Ok(v.iter().map(|&x| Complex64::new(x, 0.0)).collect()),
            (CellValues::Complex(v), false) => Ok(v.iter().map(|&p| complex(p)).collect()),
            // An empty list parses as real; accept it either way.
            (CellValues::Real(v), false) if v.is_empty() => Ok(Vec::new()),
            (_, true) => Err(Error::Parse("\"real\": true requires a list of numbers".into())),
            (_, false) => Err(Error::Parse("complex values must be [re, im] pairs".into())),
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionJson {
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(default, skip_serializing_if = "is_false")]
    pub real: bool,
    pub values: CellValues,
}

impl From<&DyadicFunction> for FunctionJson {
    fn from(f: &DyadicFunction) -> Self {
        let (real, values) = CellValues::from_complex(f.values());
        FunctionJson { m: f.grid().m(), real, values }
    }
}

impl FunctionJson {
    pub fn to_function(&self) -> Result<DyadicFunction> {
        let grid = grid_of(self.m)?;
        let v = self.values.to_complex(self.real)?;
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("function values must be finite".into()));
        }
        DyadicFunction::new(grid, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalJson {
    pub k: i32,
    pub j: u64,
}

impl From<DyadicInterval> for IntervalJson {
    fn from(d: DyadicInterval) -> Self {
        IntervalJson { k: d.k, j: d.j }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub k: i32,
    pub j: u64,
    pub w: f64,
}

/// Sparse weights: omitted tiles carry zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsJson {
    #[serde(rename = "M")]
    pub m: u32,
    pub weights: Vec<WeightEntry>,
}

impl From<&Weights> for WeightsJson {
    fn from(a: &Weights) -> Self {
        let grid = a.grid();
        let weights = a
            .dense()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(i, &w)| {
                let d = grid.interval_at(i);
                WeightEntry { k: d.k, j: d.j, w }
            })
            .collect();
        WeightsJson { m: grid.m(), weights }
    }
}

impl WeightsJson {
    pub fn to_weights(&self) -> Result<Weights> {
        let grid = grid_of(self.m)?;
        let mut dense = vec![0.0; grid.tile_count()];
        let mut seen = vec![false; grid.tile_count()];
        for e in &self.weights {
            let i = grid.index(&interval(grid, e.k, e.j)?);
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Parse(format!("duplicate weight for (k={}, j={})", e.k, e.j)));
            }
            dense[i] = e.w;
        }
        Weights::from_dense(grid, dense)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileSetJson {
    #[serde(rename = "M")]
    pub m: u32,
    pub tiles: Vec<IntervalJson>,
}

impl From<&TileSet> for TileSetJson {
    fn from(s: &TileSet) -> Self {
        TileSetJson { m: s.grid().m(), tiles: s.iter().map(IntervalJson::from).collect() }
    }
}

impl TileSetJson {
    pub fn to_tile_set(&self) -> Result<TileSet> {
        let grid = grid_of(self.m)?;
        let ds = self.tiles.iter().map(|t| interval(grid, t.k, t.j)).collect::<Result<Vec<_>>>()?;
        TileSet::from_intervals(grid, ds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiblingConstant {
    pub k: i32,
    pub j: u64,
    pub lr: [f64; 2],
    pub rl: [f64; 2],
}

/// Sparse kernel: omitted intervals carry zero constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelJson {
    #[serde(rename = "M")]
    pub m: u32,
    pub sibling_constants: Vec<SiblingConstant>,
}

impl From<&PerfectDyadicKernel> for KernelJson {
    fn from(k: &PerfectDyadicKernel) -> Self {
        let grid = k.grid();
        let zero = Complex64::new(0.0, 0.0);
        let sibling_constants = k
            .lr()
            .iter()
            .zip(k.rl())
            .enumerate()
            .filter(|(_, (a, b))| **a != zero || **b != zero)
            .map(|(i, (&a, &b))| {
                let d = grid.interval_at(i);
                SiblingConstant { k: d.k, j: d.j, lr: pair(a), rl: pair(b) }
            })
            .collect();
        KernelJson { m: grid.m(), sibling_constants }
    }
}

impl KernelJson {
    pub fn to_kernel(&self) -> Result<PerfectDyadicKernel> {
        let grid = grid_of(self.m)?;
        let mut k = PerfectDyadicKernel::zero(grid);
        let mut seen = vec![false; grid.tile_count()];
        for c in &self.sibling_constants {
            let d = interval(grid, c.k, c.j)?;
            if std::mem::replace(&mut seen[grid.index(&d)], true) {
                return Err(Error::Parse(format!("duplicate constants for {d}")));
            }
            let (lr, rl) = (complex(c.lr), complex(c.rl));
            if !(lr.re.is_finite() && lr.im.is_finite() && rl.re.is_finite() && rl.im.is_finite()) {
                return Err(Error::InvalidKernel(format!("non-finite constant on {d}")));
            }
            k.set(&d, lr, rl)?;
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalFunctionJson {
    pub k: i32,
    pub j: u64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub real: bool,
    /// Values on the cells of the interval.
    pub values: CellValues,
}

/// Both families of an accretive system, one entry per tile in canonical
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    #[serde(rename = "M")]
    pub m: u32,
    pub b1: Vec<LocalFunctionJson>,
    pub b2: Vec<LocalFunctionJson>,
}

impl From<&AccretiveSystem> for SystemJson {
    fn from(sys: &AccretiveSystem) -> Self {
        let grid = sys.grid();
        let fam = |side| {
            (0..grid.tile_count())
                .map(|i| {
                    let d = grid.interval_at(i);
                    let (real, values) = CellValues::from_complex(sys.local(side, i));
                    LocalFunctionJson { k: d.k, j: d.j, real, values }
                })
                .collect()
        };
        SystemJson { m: grid.m(), b1: fam(Side::B1), b2: fam(Side::B2) }
    }
}

impl SystemJson {
    pub fn to_system(&self) -> Result<AccretiveSystem> {
        let grid = grid_of(self.m)?;
        let fam = |entries: &[LocalFunctionJson]| -> Result<Vec<Vec<Complex64>>> {
            let mut out: Vec<Option<Vec<Complex64>>> = vec![None; grid.tile_count()];
            for e in entries {
                let i = grid.index(&interval(grid, e.k, e.j)?);
                if out[i].replace(e.values.to_complex(e.real)?).is_some() {
                    return Err(Error::Parse(format!("duplicate entry for {}", grid.interval_at(i))));
                }
            }
            out.into_iter()
                .enumerate()
                .map(|(i, v)| v.ok_or_else(|| Error::SystemInvalid(format!("missing entry for {}", grid.interval_at(i)))))
                .collect()
        };
        AccretiveSystem::new(grid, fam(&self.b1)?, fam(&self.b2)?)
    }
}

/// A labelled group of tiles in a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupJson {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<IntervalJson>,
    pub tiles: Vec<IntervalJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<f64>,
}

/// Common output of every decomposition: labelled tile groups plus the
/// measured constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    #[serde(rename = "M")]
    pub m: u32,
    pub kind: String,
    pub groups: Vec<GroupJson>,
    pub measured: BTreeMap<String, f64>,
}

fn tree_group(label: &str, t: &Tree) -> GroupJson {
    GroupJson {
        label: label.to_string(),
        top: Some(t.top().into()),
        tiles: t.tiles().iter().map(IntervalJson::from).collect(),
        coefficient: None,
    }
}

fn set_group(label: &str, s: &TileSet) -> GroupJson {
    GroupJson { label: label.to_string(), top: None, tiles: s.iter().map(IntervalJson::from).collect(), coefficient: None }
}

impl DecompositionJson {
    pub fn from_trees(kind: &str, dec: &TreeDecomposition) -> Self {
        let mut groups: Vec<GroupJson> = dec.trees.iter().map(|t| tree_group(t.label.name(), &t.tree)).collect();
        groups.push(set_group("exceptional", &dec.exceptional));
        DecompositionJson { m: dec.exceptional.grid().m(), kind: kind.into(), groups, measured: dec.measured.clone() }
    }

    pub fn from_selection(kind: &str, sel: &Selection) -> Self {
        let mut groups: Vec<GroupJson> = sel.trees.iter().map(|t| tree_group("selected", t)).collect();
        groups.push(set_group("remainder", &sel.remainder));
        let mut measured = sel.measured.clone();
        measured.insert("n".into(), sel.n as f64);
        DecompositionJson { m: sel.remainder.grid().m(), kind: kind.into(), groups, measured }
    }

    /// One group per atom: its interval as top and the support of its Haar
    /// coefficients as tiles.
    pub fn from_atoms(grid: GridConfig, dec: &AtomicDecomposition) -> Self {
        let groups = dec
            .atoms
            .iter()
            .map(|a| {
                let w = wavelet_transform(&a.a);
                let tiles = w.entries().filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).map(|(d, _)| d.into()).collect();
                GroupJson { label: "atom".into(), top: Some(a.interval.into()), tiles, coefficient: Some(a.c) }
            })
            .collect();
        let mut measured = dec.measured.clone();
        measured.insert("p".into(), dec.p);
        DecompositionJson { m: grid.m(), kind: "atoms".into(), groups, measured }
    }

    pub fn from_subtree(dec: &SubtreeDecomposition) -> Self {
        let grid = dec.t1.grid();
        let mut groups = vec![set_group("kept", &dec.t1)];
        groups.extend(dec.removed.iter().map(|t| tree_group("removed", t)));
        groups.push(set_group("buffer", &dec.buffer));
        DecompositionJson { m: grid.m(), kind: "subtree_prune".into(), groups, measured: dec.measured.clone() }
    }

    pub fn measured(&self) -> &Measured {
        &self.measured
    }

    /// Validates the intervals and returns each group with its tiles.
    pub fn tile_sets(&self) -> Result<Vec<(String, TileSet)>> {
        let grid = grid_of(self.m)?;
        self.groups
            .iter()
            .map(|g| {
                let ds = g.tiles.iter().map(|t| interval(grid, t.k, t.j)).collect::<Result<Vec<_>>>()?;
                Ok((g.label.clone(), TileSet::from_intervals(grid, ds)?))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::czop::PerfectDyadicKernel;
    use proptest::prelude::*;

    fn grid(m: u32) -> GridConfig {
        GridConfig::new(m).unwrap()
    }

    #[test]
    fn kernel_rejects_top_and_duplicates() {
        let top = r#"{"M": 1, "sibling_constants": [{"k": 1, "j": 0, "lr": [1, 0], "rl": [0, 0]}]}"#;
        assert!(matches!(from_str::<KernelJson>(top).unwrap().to_kernel(), Err(Error::InvalidKernel(_))));
        let dup = r#"{"M": 1, "sibling_constants": [
            {"k": 0, "j": 0, "lr": [1, 0], "rl": [0, 0]},
            {"k": 0, "j": 0, "lr": [2, 0], "rl": [0, 0]}]}"#;
        assert!(matches!(from_str::<KernelJson>(dup).unwrap().to_kernel(), Err(Error::Parse(_))));
        let ok = r#"{"M": 1, "sibling_constants": [{"k": 0, "j": 1, "lr": [0.5, -1], "rl": [0, 2]}]}"#;
        let k = from_str::<KernelJson>(ok).unwrap().to_kernel().unwrap();
        let d = grid(1).interval(0, 1).unwrap();
        assert_eq!(k.get(&d).unwrap(), (Complex64::new(0.5, -1.0), Complex64::new(0.0, 2.0)));
        assert_eq!(PerfectDyadicKernel::zero(grid(1)).lr().len(), k.lr().len());
        assert!(from_str::<KernelJson>("{").is_err());
    }

    #[test]
    fn function_forms() {
        let r = r#"{"M": 1, "real": true, "values": [1, 2, 3, 4]}"#;
        let f = from_str::<FunctionJson>(r).unwrap().to_function().unwrap();
        assert!(f.is_real());
        let c = r#"{"M": 1, "values": [[1, 0], [0, 1], [0, 0], [2, 2]]}"#;
        let g = from_str::<FunctionJson>(c).unwrap().to_function().unwrap();
        assert_eq!(g.values()[1], Complex64::new(0.0, 1.0));
        assert_eq!(FunctionJson::from(&g).to_function().unwrap(), g);
        let wrong = r#"{"M": 1, "real": true, "values": [1, 2, 3]}"#;
        assert!(from_str::<FunctionJson>(wrong).unwrap().to_function().is_err());
        let mixed = r#"{"M": 1, "real": true, "values": [[1, 0], [0, 1], [0, 0], [2, 2]]}"#;
        assert!(from_str::<FunctionJson>(mixed).unwrap().to_function().is_err());
    }

    #[test]
    fn system_round_trip() {
        let sys = AccretiveSystem::constant(grid(2));
        let j = SystemJson::from(&sys);
        let back: SystemJson = from_str(&to_string(&j).unwrap()).unwrap();
        assert_eq!(back, j);
        assert_eq!(back.to_system().unwrap(), sys);
        let mut missing = j.clone();
        missing.b1.pop();
        assert!(matches!(missing.to_system(), Err(Error::SystemInvalid(_))));
    }

    fn value() -> impl Strategy<Value = f64> {
        prop_oneof![Just(0.0), -1e6f64..1e6, any::<f64>().prop_filter("finite", |v| v.is_finite())]
    }

    proptest! {
        #[test]
        fn function_round_trip(m in 1u32..=3, seed in prop::collection::vec((value(), value(), any::<bool>()), 64)) {
            let g = grid(m);
            let vals: Vec<Complex64> = seed.iter().cycle().take(g.cells())
                .map(|&(a, b, r)| Complex64::new(a, if r { 0.0 } else { b })).collect();
            let f = DyadicFunction::new(g, vals).unwrap();
            let j = FunctionJson::from(&f);
            let back: FunctionJson = from_str(&to_string(&j).unwrap()).unwrap();
            prop_assert_eq!(&back, &j);
            prop_assert_eq!(back.to_function().unwrap(), f);
        }

        #[test]
        fn weights_and_tiles_round_trip(m in 1u32..=3, seed in prop::collection::vec((0.0f64..10.0, any::<bool>()), 128)) {
            let g = grid(m);
            let dense: Vec<f64> = seed.iter().cycle().take(g.tile_count()).map(|&(w, z)| if z { 0.0 } else { w }).collect();
            let a = Weights::from_dense(g, dense).unwrap();
            let j = WeightsJson::from(&a);
            let back: WeightsJson = from_str(&to_string(&j).unwrap()).unwrap();
            prop_assert_eq!(&back, &j);
            prop_assert_eq!(back.to_weights().unwrap(), a.clone());
            let s = TileSet::from_indices(g, (0..g.tile_count()).filter(|&i| a.at(i) > 0.0));
            let t = TileSetJson::from(&s);
            let back: TileSetJson = from_str(&to_string(&t).unwrap()).unwrap();
            prop_assert_eq!(&back, &t);
            prop_assert_eq!(back.to_tile_set().unwrap(), s);
        }

        #[test]
        fn kernel_round_trip(m in 1u32..=3, seed in prop::collection::vec((value(), value(), value(), value()), 64)) {
            let g = grid(m);
            let mut k = PerfectDyadicKernel::zero(g);
            for (i, &(a, b, c, d)) in seed.iter().cycle().take(g.interior_count()).enumerate().skip(1) {
                k.set(&g.interval_at(i), Complex64::new(a, b), Complex64::new(c, d)).unwrap();
            }
            let j = KernelJson::from(&k);
            let back: KernelJson = from_str(&to_string(&j).unwrap()).unwrap();
            prop_assert_eq!(&back, &j);
            prop_assert_eq!(back.to_kernel().unwrap(), k);
        }
    }
}
