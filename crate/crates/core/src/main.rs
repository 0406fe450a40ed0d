use std::io::Write;

fn main() {
    let (code, out, err) = freespec::cli::run_args(std::env::args());
    let _ = std::io::stdout().write_all(out.as_bytes());
    let _ = std::io::stderr().write_all(err.as_bytes());
    std::process::exit(code);
}
