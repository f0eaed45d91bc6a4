package main

import (
	"fmt"

	"example.com/mid"
)

func main() {
	fmt.Println(mid.Count("p3"))
}
