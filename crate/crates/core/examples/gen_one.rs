fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = solgen_core::GenConfig::default();
    let src = solgen_core::generate_source(seed, &cfg);
    print!("{src}");
    eprintln!("-- lines: {}", solgen_core::line_count(&src));
    let p = solgen_core::generate_program(seed, &cfg);
    let v = solgen_core::validate(&p);
    if !v.is_empty() {
        for viol in &v { eprintln!("VIOLATION {viol}"); }
        std::process::exit(1);
    }
}
