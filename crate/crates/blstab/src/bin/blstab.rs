fn main() {
    std::process::exit(blstab::cli::main_entry());
}
