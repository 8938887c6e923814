pub mod checks;
pub mod cli;
pub mod cohomology;
pub mod cover_charts;
pub mod combmap;
pub mod cyclic_cover;
pub mod delaunay;
pub mod linalg;
pub mod scalar;
pub mod fixtures;
pub mod format;
pub mod generate;
pub mod ddiff_surface;
pub mod volume;
