//! Host-side pieces of the docent tour guide: file formats, language-model
//! backends, scripted runs and the HTTP service.

pub mod gateway;
pub mod logfile;
pub mod mapfile;
pub mod config;
pub mod script;
pub mod cli;
pub mod service;
