pub mod config;
pub mod constructions;
pub mod darboux;
pub mod eta;
pub mod field;
pub mod focal;
pub mod linalg;
pub mod local;
pub mod parse;
pub mod poly;
pub mod report;
pub mod univariate;
