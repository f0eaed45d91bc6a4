package leaf

func Value() int { return 7 }
