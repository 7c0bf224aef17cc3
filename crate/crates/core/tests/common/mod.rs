#![allow(dead_code)]

pub mod radial_oracle;
