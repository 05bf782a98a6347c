"""Evaluating logic formulas, including the responsibility operator."""

from respgames import CheckContext, check, load_model, parse_state_formula
from respgames.fixtures import data_path

model = load_model(data_path("junction.csg"))
ctx = CheckContext(model.game, model.profiles, model.rewards)

FORMULAS = [
    '<<A1,A2>> P>=1 [X "pass"]',
    '<<A1>> P>=0.5 [X "pass"]',
    '<<A1>> P<0.5 [X "crash"]',
    '<<A1>> R{r1}>=2 [X true]',
    '<<A1,A2>> D<=0 [BCR(A1,p_brake,F<=2 "crash")]',
    '<<A1,A2>> D>=0.5 [BCR(A1,p_nb,X "crash")]',
]

for text in FORMULAS:
    verdict = check(ctx, parse_state_formula(text, model.game.agents))
    value = "" if verdict.value is None else f"  value={verdict.value:.4g}"
    print(f"{'true ' if verdict.truth else 'false'}  {text}{value}")
