pub mod bench;
pub mod category;
pub mod cli;
pub mod detector;
pub mod eval;
pub mod lexer;
pub mod mutation;
pub mod parallel;
pub mod prompt;
pub mod source;
pub mod structure;
pub mod tracker;
