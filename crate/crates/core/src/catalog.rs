//! Indecomposable maximal Cohen-Macaulay modules over `k[[x,y]]/(xy^2)`,
//! as matrix factorizations.

use std::fmt;

use crate::field::FieldSpec;
use crate::jets::JetQuotient;
use crate::matrix::{
    minimize_presentation, verify_mf, MatrixError, MatrixFactorization, PresentationMatrix, SeriesMatrix,
};
use crate::parse::parse_in;
use crate::series::{Ctx, SeriesContext, TruncatedSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Y,
    X,
    Y2,
    XY,
    XY2,
    FamA(u32),
    FamB(u32),
    FamC(u32),
    FamD(u32),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Y => write!(f, "Y"),
            Label::X => write!(f, "X"),
            Label::Y2 => write!(f, "Y2"),
            Label::XY => write!(f, "XY"),
            Label::XY2 => write!(f, "XY2"),
            Label::FamA(k) => write!(f, "FamA({k})"),
            Label::FamB(k) => write!(f, "FamB({k})"),
            Label::FamC(k) => write!(f, "FamC({k})"),
            Label::FamD(k) => write!(f, "FamD({k})"),
        }
    }
}

impl Label {
    /// The presentation matrix `phi` in the matrix text format.
    pub fn phi_text(&self) -> String {
        match *self {
            Label::Y => "y".into(),
            Label::X => "x".into(),
            Label::Y2 => "y^2".into(),
            Label::XY => "x*y".into(),
            Label::XY2 => "x*y^2".into(),
            Label::FamA(k) => format!("y, x^{k}; 0, -y"),
            Label::FamB(k) => format!("x*y, x^{}; 0, -x*y", k + 1),
            Label::FamC(k) => format!("x*y, x^{k}; 0, -y"),
            Label::FamD(k) => format!("y, x^{}; 0, -x*y", k + 1),
        }
    }

    pub fn k_param(&self) -> Option<u32> {
        match *self {
            Label::FamA(k) | Label::FamB(k) | Label::FamC(k) | Label::FamD(k) => Some(k),
            _ => None,
        }
    }

    /// The entry whose `phi` is this entry's `psi`, when it is in the list.
    pub fn complement(&self) -> Option<Label> {
        match *self {
            Label::Y => Some(Label::XY),
            Label::XY => Some(Label::Y),
            Label::X => Some(Label::Y2),
            Label::Y2 => Some(Label::X),
            Label::XY2 => None,
            Label::FamA(k) => Some(Label::FamB(k)),
            Label::FamB(k) => Some(Label::FamA(k)),
            Label::FamC(1) => None,
            Label::FamC(k) => Some(Label::FamD(k - 1)),
            Label::FamD(k) => Some(Label::FamC(k + 1)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub label: Label,
    pub mf: MatrixFactorization,
    pub k_param: Option<u32>,
    /// `(xy^2)` itself: its cokernel is `R`, so it is left out of generator
    /// statistics.
    pub degenerate: bool,
}

impl CatalogEntry {
    /// Generators of `coker(phi)` over `R`.
    pub fn nu(&self) -> Result<usize, MatrixError> {
        let p = PresentationMatrix::new(self.mf.f.clone(), self.mf.phi.clone());
        Ok(minimize_presentation(&p)?.nu())
    }

    /// Colength of the ideal of entries of `phi` together with `f`, when
    /// finite.
    pub fn entry_ideal_colength(&self) -> Option<usize> {
        let mut gens: Vec<TruncatedSeries> = self.mf.phi.entries().filter(|e| !e.is_exact_zero()).cloned().collect();
        gens.push(self.mf.f.clone());
        let bound = 2 * self.k_param.unwrap_or(1) + 6;
        JetQuotient::new(self.mf.ctx(), &gens, bound).ok().map(|q| q.dim())
    }

    pub fn to_line(&self) -> String {
        format!("{}: {}", self.label, self.mf.phi.to_text())
    }
}

/// The ring `k[[x, y]]` the catalog lives over.
pub fn catalog_context(field: FieldSpec) -> Ctx {
    SeriesContext::new(["x", "y"], field)
}

/// `f * adj(phi) / det(phi)`, by exact polynomial division.
pub fn complement(f: &TruncatedSeries, phi: &SeriesMatrix) -> Result<SeriesMatrix, MatrixError> {
    let det = phi.det()?;
    let n = phi.nrows();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let cof = adjugate_entry(phi, i, j)?;
            let num = f.poly_mul(&cof)?;
            let q = num
                .divide_exact(&det)
                .ok_or_else(|| MatrixError::ShapeMismatch(format!("det(phi) does not divide f * adj(phi) at ({i}, {j})")))?;
            row.push(q);
        }
        rows.push(row);
    }
    SeriesMatrix::from_rows(phi.ctx(), phi.precision(), rows)
}

/// Entry `(i, j)` of the adjugate: the signed `(j, i)` cofactor.
fn adjugate_entry(phi: &SeriesMatrix, i: usize, j: usize) -> Result<TruncatedSeries, MatrixError> {
    let n = phi.nrows();
    let rows: Vec<Vec<TruncatedSeries>> = (0..n)
        .filter(|&r| r != j)
        .map(|r| (0..n).filter(|&c| c != i).map(|c| phi.get(r, c).clone()).collect())
        .collect();
    let minor = SeriesMatrix::from_rows(phi.ctx(), phi.precision(), rows)?.det()?;
    Ok(if (i + j) % 2 == 0 { minor } else { minor.neg() })
}

pub fn entry(label: Label, field: FieldSpec) -> Result<CatalogEntry, MatrixError> {
    let ctx = catalog_context(field);
    let precision = 2 * label.k_param().unwrap_or(1) + 8;
    let f = parse_in("x*y^2", &ctx, precision)?;
    let phi = SeriesMatrix::parse(&label.phi_text(), &ctx, precision)?;
    let psi = complement(&f, &phi)?;
    let mf = MatrixFactorization::new(f, phi, psi)?;
    debug_assert!(verify_mf(&mf)?);
    Ok(CatalogEntry { label, mf, k_param: label.k_param(), degenerate: label == Label::XY2 })
}

/// The five cyclic entries followed by the four families for `k = 1..=k_max`.
pub fn enumerate_dinfty(k_max: u32, field: FieldSpec) -> Result<Vec<CatalogEntry>, MatrixError> {
    let mut labels = vec![Label::Y, Label::X, Label::Y2, Label::XY, Label::XY2];
    for k in 1..=k_max {
        labels.extend([Label::FamA(k), Label::FamB(k), Label::FamC(k), Label::FamD(k)]);
    }
    labels.into_iter().map(|l| entry(l, field)).collect()
}
