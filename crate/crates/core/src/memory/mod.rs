//! Encoded-qubit observables, decoders and lifetime studies.

mod decode;
mod dressed;
mod qubit;
mod study;

pub use decode::{decode_majority, decode_matching, Matching, EXACT_MATCHING_LIMIT};
pub use dressed::{measure_dressed, BareObservable, Decoder, DressedObservable, Measurement};
pub use qubit::{m1_check, EncodedQubit, M1Verdict};
pub use study::{
    fit_window, lifetime_study, LifetimePlan, LifetimeReport, LifetimeRow, ObservableKind, StudyModel,
};
