use std::io::Write;

fn main() {
    if let Err(e) = growthforge::cli::configure_threads() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
    let (code, text) = growthforge::cli::run(std::env::args_os());
    let out = if code == growthforge::cli::EXIT_USAGE {
        std::io::stderr().write_all(text.as_bytes())
    } else {
        std::io::stdout().write_all(text.as_bytes())
    };
    let _ = out;
    std::process::exit(code);
}
