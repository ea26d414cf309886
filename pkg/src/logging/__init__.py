# logging package