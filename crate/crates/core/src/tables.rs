//! Embedding-dimension tables regenerated from the injectivity bounds, and
//! transcribed reference values to compare them against.

use alloc::vec::Vec;

use crate::error::Result;
use crate::separation::{min_injective_d_upper, non_injective_d_threshold};

/// Row and column labels (`n` and `d`) of the reference tables.
pub const REFERENCE_RANGE: [usize; 5] = [2, 3, 4, 5, 6];

/// Smallest `nD` guaranteeing injectivity for full-spark `A`; rows `n`,
/// columns `d`, both over [`REFERENCE_RANGE`].
pub const REFERENCE_MINIMAL: [[usize; 5]; 5] = [
    [6, 10, 14, 18, 22],
    [12, 21, 30, 39, 48],
    [20, 36, 52, 68, 84],
    [30, 55, 80, 105, 130],
    [42, 78, 114, 150, 186],
];

/// Largest `nD` at which no `A` gives an injective embedding.
pub const REFERENCE_MAXIMAL: [[usize; 5]; 5] = [
    [4, 8, 12, 16, 20],
    [6, 12, 18, 24, 30],
    [12, 24, 36, 48, 60],
    [15, 30, 45, 60, 75],
    [18, 36, 54, 72, 90],
];

/// `(n, d, nD)` where an explicit separating `A` beats the minimal table.
pub const KNOWN_SEPARATING: [(usize, usize, usize); 4] =
    [(3, 3, 18), (3, 4, 24), (4, 2, 16), (5, 2, 25)];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    Minimal,
    Maximal,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Minimal => "minimal",
            TableKind::Maximal => "maximal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub kind: TableKind,
    pub ns: Vec<usize>,
    pub ds: Vec<usize>,
    /// `cells[row][col]` for `n = ns[row]`, `d = ds[col]`.
    pub cells: Vec<Vec<usize>>,
}

/// One table cell: `n * D` with `D` from the matching bound.
pub fn table_cell(kind: TableKind, n: usize, d: usize) -> Result<usize> {
    Ok(n * match kind {
        TableKind::Minimal => min_injective_d_upper(n, d)?,
        TableKind::Maximal => non_injective_d_threshold(n, d)?,
    })
}

pub fn build_table(kind: TableKind, ns: &[usize], ds: &[usize]) -> Result<Table> {
    let cells = ns
        .iter()
        .map(|&n| {
            ds.iter()
                .map(|&d| table_cell(kind, n, d))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        kind,
        ns: ns.to_vec(),
        ds: ds.to_vec(),
        cells,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMismatch {
    pub kind: TableKind,
    pub n: usize,
    pub d: usize,
    pub expected: usize,
    pub actual: usize,
}

/// Regenerates both tables over [`REFERENCE_RANGE`] and lists every cell
/// that differs from the reference values.
pub fn compare_with_reference() -> Result<Vec<CellMismatch>> {
    let mut out = Vec::new();
    for (kind, reference) in [
        (TableKind::Minimal, &REFERENCE_MINIMAL),
        (TableKind::Maximal, &REFERENCE_MAXIMAL),
    ] {
        let table = build_table(kind, &REFERENCE_RANGE, &REFERENCE_RANGE)?;
        for (row, &n) in table.ns.iter().enumerate() {
            for (col, &d) in table.ds.iter().enumerate() {
                let (expected, actual) = (reference[row][col], table.cells[row][col]);
                if expected != actual {
                    out.push(CellMismatch {
                        kind,
                        n,
                        d,
                        expected,
                        actual,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Best known sufficient and necessary output dimensions for one embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InjectivityBounds {
    pub embedding: &'static str,
    /// What the dimension counts: `nD` for `beta`, `D` for `delta`, `M` for the sketch.
    pub dimension: &'static str,
    /// Generic (or full-spark) injectivity holds from here on.
    pub sufficient: usize,
    /// Injectivity is impossible below this.
    pub necessary: usize,
}

/// Upper and lower dimension bounds for `n` points in `R^d` (`n, d >= 2`).
pub fn injectivity_summary(n: usize, d: usize) -> Result<[InjectivityBounds; 3]> {
    let reduced = (2 * n - 1) * d;
    Ok([
        InjectivityBounds {
            embedding: "beta",
            dimension: "nD",
            sufficient: n * min_injective_d_upper(n, d)?,
            necessary: n * (non_injective_d_threshold(n, d)? + 1),
        },
        InjectivityBounds {
            embedding: "delta",
            dimension: "D",
            sufficient: reduced,
            necessary: n * d,
        },
        InjectivityBounds {
            embedding: "sketch",
            dimension: "M",
            sufficient: reduced,
            necessary: n * d,
        },
    ])
}

/// Where `beta_A` stands for given `(n, d, D)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapRegion {
    /// No `A` separates orbits.
    NeverInjective,
    /// Unknown in general.
    Open,
    /// Every full-spark `A` separates orbits.
    FullSparkInjective,
}

impl GapRegion {
    pub fn name(self) -> &'static str {
        match self {
            GapRegion::NeverInjective => "never-injective",
            GapRegion::Open => "open",
            GapRegion::FullSparkInjective => "full-spark-injective",
        }
    }
}

pub fn gap_region(n: usize, d: usize, count: usize) -> Result<GapRegion> {
    Ok(if count <= non_injective_d_threshold(n, d)? {
        GapRegion::NeverInjective
    } else if count >= min_injective_d_upper(n, d)? {
        GapRegion::FullSparkInjective
    } else {
        GapRegion::Open
    })
}

/// `(d, D, region)` for every `d` in `ds` and `D` in `1..=max_count`.
pub fn gap_grid(
    n: usize,
    ds: &[usize],
    max_count: usize,
) -> Result<Vec<(usize, usize, GapRegion)>> {
    let mut out = Vec::new();
    for &d in ds {
        for count in 1..=max_count {
            out.push((d, count, gap_region(n, d, count)?));
        }
    }
    Ok(out)
}
