#![allow(dead_code)]

pub mod gan;
pub mod numerics;
pub mod synthesis;
