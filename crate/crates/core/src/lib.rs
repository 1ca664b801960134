pub mod gen;
pub mod logic;
pub mod lustre;
pub mod smt;
pub mod aeval;
pub mod encode;
pub mod engine;
pub mod mbp;
pub mod oracle;
pub mod runtime;
