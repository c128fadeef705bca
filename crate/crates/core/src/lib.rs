pub mod error;
pub mod numeric;
pub mod poly;

pub use error::{Error, Result};
pub use poly::Poly;
pub mod profile;
pub mod fooling;
pub mod oracle;
pub mod certificate;
pub mod harness;
