//! Host crate for the `acceptance` test target; run it with
//! `cargo test -p bbl-validation --test acceptance`.
