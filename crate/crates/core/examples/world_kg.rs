//! Prints the synthetic knowledge graph as JSON.

fn main() {
    println!("{}", psysym_core::synth::world_kg().to_json_string());
}
