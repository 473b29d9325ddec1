fn main() {
    let rendered = ncsol_core::cli::run_args(std::env::args_os());
    if rendered.code == 2 {
        eprintln!("{}", rendered.output);
    } else {
        println!("{}", rendered.output);
    }
    std::process::exit(rendered.code);
}
