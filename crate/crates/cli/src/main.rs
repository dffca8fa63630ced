fn main() {
    let code = markoff_lab::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
