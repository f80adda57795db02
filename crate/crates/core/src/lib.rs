pub mod bitstream;
pub mod bounds;
pub mod channel;
pub mod galois_rs;
pub mod harness;
pub mod inner_code;
pub mod recursive;
pub mod valley;
