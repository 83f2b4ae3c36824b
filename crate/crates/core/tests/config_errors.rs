use risnoma::harness::{load_config, parse_config, PAPER_DEFAULTS};
use risnoma::Error;

#[test]
fn power_order_violation_names_line_and_bound() {
    let text = "[power]\n\na_c = 0.3\na_t = 0.7\n";
    match parse_config(text) {
        Err(Error::Config { line, message }) => {
            assert_eq!(line, 3);
            assert!(message.contains("a_c > a_t required"), "{message}");
        }
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn missing_file_is_not_a_parse_error() {
    let err = load_config("/nonexistent/risnoma.toml").unwrap_err();
    assert!(matches!(err, Error::ConfigNotFound(_)), "{err:?}");
}

#[test]
fn unknown_key_is_rejected() {
    let err = parse_config("[channel]\nL_m = 1.5\nbogus = 2\n").unwrap_err();
    match err {
        Error::Config { line, message } => {
            assert_eq!(line, 3);
            assert!(message.contains("bogus"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn partial_file_keeps_defaults() {
    let d = load_config(PAPER_DEFAULTS).unwrap();
    let c = parse_config("[spatial]\nr_c_m = 75.0\n").unwrap();
    assert_eq!(c.params.spatial.r_c, 75.0);
    assert_eq!(c.params.channel, d.params.channel);
    assert_eq!(c.params.power, d.params.power);
    assert_eq!(c.thresholds, d.thresholds);
}

#[test]
fn malformed_toml_reports_line() {
    match parse_config("[thresholds]\ngamma_t = \n") {
        Err(Error::Config { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}
