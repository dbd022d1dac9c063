use ccsp_web::{check, lts, traces};

#[test]
fn traces_of_deadlock() {
    assert_eq!(traces("a ||{a,b} b").unwrap(), "<bot>\n");
}

#[test]
fn check_reports_holds() {
    let report = check("[[ a % r ; throww ]]").unwrap();
    assert!(
        report.starts_with("holds: [[ ((a % r) ; (throw % skip)) ]]"),
        "{report}"
    );
}

#[test]
fn lts_lines() {
    assert_eq!(lts("throw").unwrap(), "throw --!--> 0\nthrow --bot--> 0\n");
}

#[test]
fn errors_are_messages() {
    assert!(traces("a ;").unwrap_err().contains("1:"));
    assert!(check("skipp ; a").unwrap_err().contains("sort"));
}
