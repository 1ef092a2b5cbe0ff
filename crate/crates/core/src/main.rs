fn main() {
    std::process::exit(nhse::cli::main_from_env());
}
