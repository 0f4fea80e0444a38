"""Click commands of the sbgd CLI."""
