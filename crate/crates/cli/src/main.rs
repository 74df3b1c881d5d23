fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(annealed_cli::commands::run(&argv));
}
