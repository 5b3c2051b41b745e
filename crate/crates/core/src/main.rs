use std::io::Write;

fn main() {
    let (code, out, err) = pvtau::cli::run_to_strings(std::env::args_os());
    let _ = std::io::stdout().write_all(out.as_bytes());
    let _ = std::io::stderr().write_all(err.as_bytes());
    std::process::exit(code);
}
