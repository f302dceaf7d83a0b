//! Simulation of short-range airborne disease transmission through a
//! cough-discharged droplet cloud.
//!
//! A transmitter coughs a polydisperse droplet cloud; the cloud travels as
//! a buoyant turbulent puff whose trajectory follows its momentum budget,
//! droplets settle out class by class, and a receiver standing downstream
//! intercepts part of the cloud through the disc spanned by its facial
//! breadths. Reception is counted droplet by droplet and compared against
//! a detection threshold: crossing it marks the receiver infected. The
//! crate exposes the physical layers individually, a step-by-step engine
//! that composes them (deterministic or stochastic counts), closed-form
//! infection-probability evaluation, and batch drivers for ensembles,
//! parameter sweeps, and distance/time probability surfaces.

pub mod cloud;
pub mod config;
pub mod engine;
pub mod error;
pub mod infection;
pub mod model;
pub mod output;
pub mod receiver;
pub mod sweeps;
pub mod trajectory;
