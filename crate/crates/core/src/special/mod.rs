pub mod boundary;
pub mod gamma;
pub mod hypergeometric;
