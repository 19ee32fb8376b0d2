use clap::Parser;

use taskgrader::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = run(cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
