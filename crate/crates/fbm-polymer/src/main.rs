use clap::Parser;

fn main() {
    let cli = fbm_polymer::cli::Cli::parse();
    match fbm_polymer::cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
