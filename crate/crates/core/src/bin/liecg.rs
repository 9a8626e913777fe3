fn main() {
    std::process::exit(liecg::table_cli::cli_main(std::env::args_os()));
}
