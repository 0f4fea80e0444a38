"""Graph, polytope, game, learner and experiment services."""
