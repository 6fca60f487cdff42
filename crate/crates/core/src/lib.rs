//! Overloaded uniquely-decodable antipodal CDMA code sets.
//!
//! Construction from GF(2^4) seeds ([`codebook`]), verification of unique
//! decodability and related combinatorics ([`verify`]), the recursive,
//! row-sequential and ML decoders ([`decode`]), and AWGN BER simulation
//! ([`channel`]).

pub mod channel;
pub mod codebook;
pub mod decode;
pub mod error;
pub mod field16;
pub mod fixtures;
pub mod verify;

pub use channel::{run_ber, BerRecord, DecoderKind, SimConfig};
pub use codebook::{build_code_set, BinaryCodeSet, CodeSet, SeedVariant, SymbolMatrix};
pub use decode::{DecodeResult, FdaConfig, TieRule};
pub use error::{Error, Result};
pub use field16::{FieldElem, GroupVector};
pub use verify::{NullSpaceWitness, UdVerdict};
