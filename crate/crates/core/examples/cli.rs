//! The command-line entry point called in-process.

fn main() {
    let p = r#"{"lambda":0,"alpha":0,"beta":0,"gamma":0,"a":0.5,"c":-1}"#;
    let code = quadcycle::cli::dispatch(["quadcycle", "equilibria", "--system", "canonical24", "--params", p]);
    println!("exit code {code}");
}
