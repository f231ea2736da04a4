//! Prints the rock/paper/scissors gesture model fitted from the synthetic
//! pose generator. Regenerate the shipped file with
//! `cargo run -p xrk-core --example gesture_model > crates/core/data/rps_gesture_model.json`.

fn main() {
    let model = xrk_core::ai::rps_model();
    println!("{}", serde_json::to_string_pretty(&model).expect("model serializes"));
}
