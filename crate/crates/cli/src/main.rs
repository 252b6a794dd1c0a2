use std::io::Write;

fn main() {
    let out = mcde_cli::run(std::env::args_os());
    std::io::stdout().write_all(out.stdout.as_bytes()).ok();
    std::io::stderr().write_all(out.stderr.as_bytes()).ok();
    std::process::exit(out.code);
}
