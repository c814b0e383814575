fn main() {
    // CLI wiring lands once the scenario layer exists.
    eprintln!("mpqc: not yet wired");
    std::process::exit(2);
}
