fn main() {
    std::process::exit(rqmc_core::cli::main_with_env());
}
