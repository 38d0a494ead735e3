//! Deliberate formula perturbations used as negative controls.
//!
//! A fault is active only on the thread that installed it and only for the
//! duration of the closure passed to [`with_fault`].

use std::cell::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fault {
    /// Negate `x` in the matrix to Iwasawa conversion.
    IwasawaXSign,
    /// Drop the `1/p` factor from the local densities of `omega_weight`.
    OmegaDropInverse,
    /// Omit the `(1, y)` points with `p | y` from the projective line.
    ProjLineDropInfinity,
    /// Evaluate the Mellin side of `Phi` at `nu` instead of `conj(nu)`.
    MellinNoConj,
    /// Drop the `1/zeta(2)` factor from the determinant-equation main term.
    MainTermDropZeta,
}

impl Fault {
    pub const ALL: [Fault; 5] = [
        Fault::IwasawaXSign,
        Fault::OmegaDropInverse,
        Fault::ProjLineDropInfinity,
        Fault::MellinNoConj,
        Fault::MainTermDropZeta,
    ];

    pub fn parse(name: &str) -> Option<Fault> {
        match name {
            "iwasawa-x-sign" => Some(Fault::IwasawaXSign),
            "omega-drop-inverse" => Some(Fault::OmegaDropInverse),
            "proj-line-drop-infinity" => Some(Fault::ProjLineDropInfinity),
            "mellin-no-conj" => Some(Fault::MellinNoConj),
            "main-term-drop-zeta" => Some(Fault::MainTermDropZeta),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Fault::IwasawaXSign => "iwasawa-x-sign",
            Fault::OmegaDropInverse => "omega-drop-inverse",
            Fault::ProjLineDropInfinity => "proj-line-drop-infinity",
            Fault::MellinNoConj => "mellin-no-conj",
            Fault::MainTermDropZeta => "main-term-drop-zeta",
        }
    }
}

thread_local! {
    static ACTIVE: Cell<Option<Fault>> = const { Cell::new(None) };
}

/// Runs `body` with `fault` installed on the current thread.
pub fn with_fault<R>(fault: Fault, body: impl FnOnce() -> R) -> R {
    struct Reset(Option<Fault>);
    impl Drop for Reset {
        fn drop(&mut self) {
            ACTIVE.with(|a| a.set(self.0));
        }
    }
    let previous = ACTIVE.with(|a| a.replace(Some(fault)));
    let _reset = Reset(previous);
    body()
}

pub(crate) fn active(fault: Fault) -> bool {
    ACTIVE.with(|a| a.get() == Some(fault))
}
