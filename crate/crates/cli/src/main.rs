use clap::Parser;
use pe3d_cli::commands::EnvDefaults;
use pe3d_cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    let status = dispatch(
        cli,
        &EnvDefaults::from_process(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    std::process::exit(status);
}
