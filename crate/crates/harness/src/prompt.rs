//! Prompt templates shipped with the harness. Only the GAME STATE block and
//! the player marks are substituted; `{row}`-style placeholders that belong
//! to the rules text are left as written.

use vpr_core::game::{EnvKind, EnvState, Mark};

pub struct Template {
    pub system: &'static str,
    pub user: &'static str,
}

pub fn template(env: EnvKind) -> Template {
    match env {
        EnvKind::TicTacToe => Template {
            system: include_str!("../prompts/tictactoe.system.txt"),
            user: include_str!("../prompts/tictactoe.user.txt"),
        },
        EnvKind::Sudoku => Template {
            system: include_str!("../prompts/sudoku.system.txt"),
            user: include_str!("../prompts/sudoku.user.txt"),
        },
        EnvKind::Minesweeper => Template {
            system: include_str!("../prompts/minesweeper.system.txt"),
            user: include_str!("../prompts/minesweeper.user.txt"),
        },
    }
}

/// The user prompt for `state`; `mark` is the agent's mark in Tic-Tac-Toe.
pub fn user_prompt(state: &EnvState, mark: Option<Mark>) -> String {
    // Template files end in a newline; the prompt ends with the block itself.
    let user = template(state.kind()).user;
    let mut text = user.strip_suffix('\n').unwrap_or(user).to_string();
    if let Some(m) = mark {
        text = text
            .replace("{mark}", &m.as_char().to_string())
            .replace("{opponent_mark}", &m.other().as_char().to_string());
    }
    text.replace("{game_state}", &state.render())
}

pub fn system_prompt(env: EnvKind) -> &'static str {
    template(env).system
}
