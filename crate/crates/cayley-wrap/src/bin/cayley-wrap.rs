fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    std::process::exit(cayley_wrap::cli::run(&argv, &mut out, &mut err));
}
