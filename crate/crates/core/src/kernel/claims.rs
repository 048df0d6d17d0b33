use std::fmt;

use serde::{Deserialize, Serialize};

/// Validity claims carried by a kernel. Claims are sufficient conditions
/// established by construction; a missing claim means "not asserted".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct KernelKind {
    pub positive_definite: bool,
    pub conditionally_negative_definite: bool,
    /// Implies `conditionally_negative_definite` and a vanishing coincident diagonal.
    pub pseudo_variogram: bool,
    /// Stationary-increment cross-variogram built from PSD sills.
    pub cross_variogram: bool,
}

/// Single headline label for a set of claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindLabel {
    ClaimedPositiveDefinite,
    ClaimedConditionallyNegativeDefinite,
    ClaimedPseudoVariogram,
    Unvalidated,
}

impl KernelKind {
    pub const UNVALIDATED: Self =
        Self { positive_definite: false, conditionally_negative_definite: false, pseudo_variogram: false, cross_variogram: false };
    pub const PD: Self = Self { positive_definite: true, ..Self::UNVALIDATED };
    pub const CND: Self = Self { conditionally_negative_definite: true, ..Self::UNVALIDATED };
    pub const PCV: Self = Self { conditionally_negative_definite: true, pseudo_variogram: true, ..Self::UNVALIDATED };

    pub fn pd_if(cond: bool) -> Self {
        if cond {
            Self::PD
        } else {
            Self::UNVALIDATED
        }
    }

    pub fn is_pd(self) -> bool {
        self.positive_definite
    }

    pub fn is_cnd(self) -> bool {
        self.conditionally_negative_definite
    }

    pub fn is_pcv(self) -> bool {
        self.pseudo_variogram
    }

    pub fn is_unvalidated(self) -> bool {
        !(self.positive_definite || self.conditionally_negative_definite)
    }

    /// Claims kept by sums and positive rescaling.
    pub fn cone(kinds: impl IntoIterator<Item = Self>) -> Self {
        kinds.into_iter().fold(
            Self { positive_definite: true, conditionally_negative_definite: true, pseudo_variogram: true, cross_variogram: true },
            |a, b| Self {
                positive_definite: a.positive_definite && b.positive_definite,
                conditionally_negative_definite: a.conditionally_negative_definite && b.conditionally_negative_definite,
                pseudo_variogram: a.pseudo_variogram && b.pseudo_variogram,
                cross_variogram: a.cross_variogram && b.cross_variogram,
            },
        )
    }

    /// Claims kept by entrywise products: only positive definiteness.
    pub fn schur(kinds: impl IntoIterator<Item = Self>) -> Self {
        Self::pd_if(kinds.into_iter().all(|k| k.positive_definite))
    }

    pub fn label(self) -> KindLabel {
        if self.pseudo_variogram {
            KindLabel::ClaimedPseudoVariogram
        } else if self.conditionally_negative_definite {
            KindLabel::ClaimedConditionallyNegativeDefinite
        } else if self.positive_definite {
            KindLabel::ClaimedPositiveDefinite
        } else {
            KindLabel::Unvalidated
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.positive_definite {
            parts.push("positive definite");
        }
        if self.pseudo_variogram {
            parts.push("pseudo cross-variogram");
        } else if self.conditionally_negative_definite {
            parts.push("conditionally negative definite");
        }
        if parts.is_empty() {
            parts.push("unvalidated");
        }
        f.write_str(&parts.join(", "))
    }
}
