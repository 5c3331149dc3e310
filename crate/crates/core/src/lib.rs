pub mod evaluator;
pub mod fixtures;
pub mod harness;
pub mod oracle;
pub mod templates;
pub mod tools;
pub mod value;
pub mod wb_data;
