fn main() {
    std::process::exit(namestate::cli::main_entry());
}
