fn main() {
    std::process::exit(alkit::cli::main_entry());
}
