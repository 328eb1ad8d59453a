pub mod random_universe;
