pub mod channels;
pub mod cli;
pub mod error;
pub mod imperfections;
pub mod optimize;
pub mod protocol;
pub mod qmath;
pub mod tomography;
