use std::io::Write;

fn main() {
    let out = lenscs_cli::run(std::env::args_os());
    print!("{}", out.stdout);
    if !out.stderr.is_empty() {
        eprint!("{}", out.stderr);
    }
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}
