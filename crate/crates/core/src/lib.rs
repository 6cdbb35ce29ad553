pub mod bp;
pub mod channel;
pub mod code;
pub mod effective;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod gauge;
pub mod gf2;
pub mod instanton;
pub mod local;
pub mod loops;
pub mod lp;
pub mod testgraphs;

pub use code::{Codeword, ParityCheckCode};
pub use error::{Error, Result};
